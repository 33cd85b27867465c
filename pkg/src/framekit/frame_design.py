"""Shift-generated sequences in a finitely generated shift-invariant space, fiber by fiber.

The subspace is described by its dimension function on a finite partition of
the torus (:class:`FsiSpec`).  On each cell the fibers of the generators are
``n`` vectors in ``C^{d_i}`` written in a fixed orthonormal basis of the fiber;
every quantity of interest (norms, frame-operator spectra, potentials) is
invariant under the choice of that basis, so the canonical basis is used.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import MajorizationError, ValidationError
from .fiber_algebra import as_synthesis, frame_operator, hermitian_eig
from .measure import AtomizedDomain, vector_majorize
from .schur_horn import synthesis_vectors

ZERO_TOL = 1e-10
FRAME_TOL = 1e-12


@dataclass(frozen=True)
class FsiSpec:
    """Dimension function ``d(x)`` of the subspace, constant on each cell.

    Cells where ``d = 0`` lie outside the spectrum and are not represented.
    """

    domain: AtomizedDomain
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != len(self.domain):
            raise ValidationError("one dimension per cell is required")
        if any(d < 1 for d in dims):
            raise ValidationError("fiber dimensions must be >= 1 on the spectrum")
        if self.domain.total_weight > 1.0 + 1e-12:
            raise ValidationError("cell weights are measures of subsets of the torus: total must be <= 1")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_cells(cls, weights, dims, labels=None):
        return cls(AtomizedDomain(tuple(weights), None if labels is None else tuple(labels)), tuple(dims))

    def __len__(self):
        return len(self.dims)

    @property
    def weights(self):
        return self.domain.p

    @property
    def labels(self):
        return self.domain.labels

    @property
    def max_dim(self):
        return max(self.dims)

    @property
    def dimension_constant(self):
        """``C_W = sum_i d_i p_i``, the integral of the dimension function."""
        return float(np.dot(self.dims, self.domain.p))


@dataclass(frozen=True)
class FineStructure:
    """Per-cell fiber norms ``alpha_j(x)`` (length n) and spectra ``lambda_j(x)`` (length d_i)."""

    norms: tuple
    spectra: tuple

    def __post_init__(self):
        norms = tuple(np.array(a, dtype=float).reshape(-1) for a in self.norms)
        spectra = tuple(np.array(s, dtype=float).reshape(-1) for s in self.spectra)
        if len(norms) != len(spectra):
            raise ValidationError("norms and spectra need one entry per cell")
        if len({a.size for a in norms}) > 1:
            raise ValidationError("every cell needs the same number n of norms")
        for a, s in zip(norms, spectra):
            if np.any(a < 0) or np.any(s < 0) or not (np.all(np.isfinite(a)) and np.all(np.isfinite(s))):
                raise ValidationError("norms and spectra must be finite and non-negative")
            if np.any(np.diff(s) > ZERO_TOL * max(1.0, s.max(initial=0.0))):
                raise ValidationError("spectra must be sorted non-increasingly")
        for arr in norms + spectra:
            arr.setflags(write=False)
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "spectra", spectra)

    @property
    def n(self):
        return self.norms[0].size if self.norms else 0

    def check_shape(self, spec):
        if len(self.norms) != len(spec):
            raise ValidationError(f"expected {len(spec)} cells, got {len(self.norms)}")
        for i, (s, d) in enumerate(zip(self.spectra, spec.dims)):
            if s.size != d:
                raise ValidationError(f"cell {spec.labels[i]!r}: spectrum has length {s.size}, fiber dimension is {d}")


@dataclass(frozen=True)
class FiberFrame:
    """Fibers of ``n`` generators: one ``d_i x n`` complex matrix per cell (columns are vectors)."""

    spec: FsiSpec
    fibers: tuple = field(repr=False)

    def __post_init__(self):
        if len(self.fibers) != len(self.spec):
            raise ValidationError("one fiber matrix per cell is required")
        fibers = tuple(as_synthesis(t, d) for t, d in zip(self.fibers, self.spec.dims))
        if len({t.shape[1] for t in fibers}) > 1:
            raise ValidationError("every cell needs the same number of vectors")
        object.__setattr__(self, "fibers", fibers)

    @property
    def n(self):
        return self.fibers[0].shape[1]

    def fiber_norms(self):
        """``||f_j(x)||^2`` per cell, shape ``(cells, n)``."""
        return np.array([np.sum(np.abs(t) ** 2, axis=0) for t in self.fibers])

    def global_norms(self):
        """``||f_j||^2 = integral ||f_j(x)||^2 dx``."""
        return self.spec.weights @ self.fiber_norms()

    def frame_operators(self):
        return [frame_operator(t) for t in self.fibers]


def admissible(fs, spec):
    """Whether ``fs`` is the fine structure of some shift-generated Bessel sequence.

    On every cell: the spectrum vanishes beyond ``min(d, n)`` and the norms are
    majorized by the spectrum.
    """
    fs.check_shape(spec)
    n = fs.n
    for a, lam, d in zip(fs.norms, fs.spectra, spec.dims):
        r = min(d, n)
        if np.any(lam[r:] > ZERO_TOL * max(1.0, lam.max(initial=0.0))):
            return False
        if not vector_majorize(a, lam):
            return False
    return True


def _cell_vectors(alpha, lam):
    syn = synthesis_vectors(lam, alpha)
    return syn.vectors * np.sqrt(alpha)


def map_cells(fn, items, max_workers=1):
    """``[fn(*item) for item in items]``, fanned out to a thread pool when ``max_workers > 1``."""
    items = list(items)
    if max_workers and max_workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            return list(pool.map(lambda item: fn(*item), items))
    return [fn(*item) for item in items]


def realize(fs, spec, max_workers=1):
    """Fibers with the prescribed norms and frame-operator spectra on every cell.

    The frame operator on each cell comes out diagonal in the fiber basis.
    """
    if not admissible(fs, spec):
        raise MajorizationError("fine structure is not admissible")
    return FiberFrame(spec, tuple(map_cells(_cell_vectors, zip(fs.norms, fs.spectra), max_workers)))


def realize_with_operator(operators, norms, spec):
    """Fibers whose frame operator equals the given positive matrix on every cell.

    ``operators[i]`` is a ``d_i x d_i`` positive semi-definite matrix and
    ``norms[i]`` the prescribed fiber norms, majorized by its spectrum.
    """
    if len(operators) != len(spec) or len(norms) != len(spec):
        raise ValidationError("one operator and one norm vector per cell are required")
    fibers = []
    for i, (s, a) in enumerate(zip(operators, norms)):
        s = np.asarray(s, dtype=complex)
        if s.shape != (spec.dims[i], spec.dims[i]):
            raise ValidationError(f"cell {spec.labels[i]!r}: operator must be {spec.dims[i]}x{spec.dims[i]}")
        eig = hermitian_eig(s)
        lam = eig.eigenvalues
        if lam[-1] < -ZERO_TOL * max(1.0, lam[0]):
            raise ValidationError(f"cell {spec.labels[i]!r}: operator is not positive semi-definite")
        lam = np.maximum(lam, 0.0)
        a = np.asarray(a, dtype=float)
        if not vector_majorize(a, lam):
            raise MajorizationError(f"cell {spec.labels[i]!r}: norms are not majorized by the spectrum")
        fibers.append(eig.eigenvectors @ _cell_vectors(a, lam))
    return FiberFrame(spec, tuple(fibers))


def cell_spectrum(t):
    """Non-increasing spectrum of ``T T*``; entries beyond the rank bound ``min(d, n)`` are exactly zero."""
    d, n = t.shape
    lam = np.maximum(hermitian_eig(frame_operator(t)).eigenvalues, 0.0)
    lam[min(d, n):] = 0.0
    return lam


def extract_fine_structure(frame):
    """Per-cell fiber norms and frame-operator spectra of ``frame``."""
    return FineStructure(
        tuple(np.sum(np.abs(t) ** 2, axis=0) for t in frame.fibers),
        tuple(cell_spectrum(t) for t in frame.fibers),
    )


def potential_terms(obj, phi):
    """Per-cell values ``sum_j phi(lambda_j)`` (zero eigenvalues inside the fiber count as ``phi(0)``)."""
    fs = extract_fine_structure(obj) if isinstance(obj, FiberFrame) else obj
    return np.array([float(np.sum(phi(lam))) for lam in fs.spectra])


def potential(obj, phi, spec=None):
    """Convex potential ``sum_i p_i sum_{j <= d_i} phi(lambda_ij)``.

    ``obj`` is a :class:`FiberFrame` or a :class:`FineStructure`; the latter
    needs ``spec`` for the cell weights.
    """
    if isinstance(obj, FiberFrame):
        spec = obj.spec
    elif spec is None:
        raise ValidationError("a FineStructure needs the FsiSpec to weigh its cells")
    else:
        obj.check_shape(spec)
    return float(np.dot(spec.weights, potential_terms(obj, phi)))


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float
    is_frame: bool


def frame_bounds(frame):
    """Smallest and largest fiber eigenvalue over all cells."""
    spectra = [cell_spectrum(t) for t in frame.fibers]
    lower = min(float(s[-1]) for s in spectra)
    upper = max(float(s[0]) for s in spectra)
    return FrameBounds(lower, upper, lower > FRAME_TOL)


def uniform_tight_design(spec, n):
    """``n`` generators of total norm ``1/n`` each whose frame operator is ``P_W / C_W``.

    On a cell of dimension ``d`` every fiber norm is ``d / (n C_W)``.
    """
    if n < spec.max_dim:
        raise ValidationError(f"need n >= max fiber dimension {spec.max_dim}, got {n}")
    cw = spec.dimension_constant
    fs = FineStructure(
        tuple(np.full(n, d / (n * cw)) for d in spec.dims),
        tuple(np.full(d, 1.0 / cw) for d in spec.dims),
    )
    return realize(fs, spec)
