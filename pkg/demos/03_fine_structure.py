"""
Prescribed fine structure
=========================

A shift-invariant subspace is modelled by cells of fiber dimension ``d`` and
measure ``p``.  On every cell we ask for given vector norms and a given frame
spectrum; the pair is realizable exactly when the norms are majorized by the
spectrum and the rank fits.
"""

import numpy as np

from framekit.errors import MajorizationError
from framekit.frame_design import (
    FineStructure,
    FsiSpec,
    admissible,
    extract_fine_structure,
    frame_bounds,
    potential,
    realize,
)
from framekit.potentials import power

spec = FsiSpec.from_cells([0.4, 0.4, 0.2], [1, 2, 3], labels=["low", "mid", "high"])
print("dimension constant", spec.dimension_constant)

norms = (np.array([1.0, 0.5, 0.5]), np.array([1.0, 1.0, 1.0]), np.array([2.0, 0.5, 0.5]))
spectra = (np.array([2.0]), np.array([2.0, 1.0]), np.array([2.0, 0.5, 0.5]))
fs = FineStructure(norms, spectra)
print("admissible:", admissible(fs, spec))

frame = realize(fs, spec)
back = extract_fine_structure(frame)
for label, a, lam in zip(spec.labels, back.norms, back.spectra):
    print(f"  {label:5s} norms {np.round(a, 12)}  spectrum {np.round(lam, 12)}")
print("global norms", frame.global_norms())
fb = frame_bounds(frame)
print(f"frame bounds [{fb.lower:.3f}, {fb.upper:.3f}]")
print("frame potential", potential(frame, power(2)))

# the spectrum on 'mid' is too flat for norms (2.5, 0.25, 0.25)
bad = FineStructure((norms[0], np.array([2.5, 0.25, 0.25]), norms[2]), spectra)
print("admissible:", admissible(bad, spec))
try:
    realize(bad, spec)
except MajorizationError as exc:
    print("refused:", exc)
