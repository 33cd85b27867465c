"""
Majorization and waterfilling
=============================

Rearrangements, majorization between step functions, and the discrete
waterfill that flattens the tail of a vector onto ``d`` slots.
"""

import numpy as np

from framekit.measure import ScalarField, decreasing_rearrangement, majorizes, vector_majorize
from framekit.potentials import REGISTRY
from framekit.waterfilling import discrete_waterfill_full, level_for_total

# a field on three atoms of unequal mass
f = ScalarField.from_values([0.2, 0.5, 0.3], [1.0, 4.0, 2.0])
fs = decreasing_rearrangement(f)
print("rearrangement edges ", fs.edges)
print("rearrangement values", fs.values)

# averaging flattens: the constant with the same integral is majorized by f
flat = ScalarField.from_values([0.2, 0.5, 0.3], np.full(3, f.integral()))
print("flat < f:", majorizes(flat, f))

# every convex potential agrees
for name, phi in REGISTRY.items():
    print(f"  {name:9s} int phi(flat) = {np.dot(flat.domain.weights, phi(flat.values)):.4f}"
          f"  <=  int phi(f) = {np.dot(f.domain.weights, phi(f.values)):.4f}")

# raising the floor until the integral reaches 3
res = level_for_total(f, 3.0)
print("level", res.level, "filled values", res.filled.values)

# discrete waterfill of five norms onto a 3-dimensional fiber
gamma = np.array([2.5, 1.0, 0.6, 0.5, 0.4])
w = discrete_waterfill_full(gamma, 3)
print("L_3(gamma) =", w.values, "level", w.level)
print("gamma < L_3(gamma):", vector_majorize(gamma, w.values))

# any other 3-vector above gamma is also above the waterfill
beta = np.array([3.0, 1.5, 0.5])
print("gamma < beta:", vector_majorize(gamma, beta), " L_3(gamma) < beta:", vector_majorize(w.values, beta))
