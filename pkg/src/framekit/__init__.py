"""Frames of translates in finitely generated shift-invariant spaces.

Fiber-wise design of shift-generated sequences with prescribed norms and
frame-operator spectra, and minimization of convex frame potentials.
"""
from .errors import (
    ConvergenceError,
    FramekitError,
    InfeasibleError,
    InterlacingError,
    MajorizationError,
    PreconditionError,
    ValidationError,
)
from .fiber_algebra import as_synthesis, eigenvalues, frame_operator, gram, hermitian_eig, rank_one
from .measure import (
    AtomizedDomain,
    ScalarField,
    StepFunction,
    average_map,
    decreasing_rearrangement,
    integral_of,
    majorizes,
    submajorizes,
    vector_majorize,
    vector_submajorize,
)
from .potentials import REGISTRY, ConvexFn, exponential, parse_phi, piecewise_linear, power
from .waterfilling import check_waterfill_majorization, discrete_waterfill, level_for_total, waterfill_at
from .schur_horn import field_schur_horn, schur_horn_unitary, synthesis_vectors, two_by_two_block
from .frame_design import (
    FiberFrame,
    FineStructure,
    FsiSpec,
    admissible,
    extract_fine_structure,
    frame_bounds,
    potential,
    realize,
    realize_with_operator,
    uniform_tight_design,
)
from .eigensteps import (
    EigenstepTable,
    additive_model_membership,
    eigensteps_of,
    rank_one_completion,
    realize_from_eigensteps,
    validate_eigensteps,
)
from .optimizer import (
    WeightMatrix,
    assemble_optimal,
    brute_force_oracle,
    compare_minimizers,
    optimize_reduced,
    reduced_gradient,
    reduced_objective,
    reduced_spectra,
    tight_exists,
    uniform_optimal,
)

__version__ = "0.1.0"
