"""
Optimal designs
===============

Minimize a convex frame potential over all frames of a subspace with given
vector norms.  A single fiber dimension has a closed form; mixed dimensions
reduce to a small convex program over how each norm is split between cells.
"""

import numpy as np

from framekit.frame_design import FsiSpec, frame_bounds
from framekit.optimizer import assemble_optimal, brute_force_oracle, optimize_reduced, tight_exists, uniform_optimal
from framekit.potentials import exponential, power

for alpha in ([1, 1, 1], [3, 1, 1]):
    u = uniform_optimal(alpha, 2)
    print(f"alpha={alpha}: spectrum {u.spectrum}, level {u.level}, tight {u.tight},"
          f" tight_exists {tight_exists(alpha, 2)}")

# two cells: a line and a plane, each of measure 1/2
spec = FsiSpec.from_cells([0.5, 0.5], [1, 2], labels=["line", "plane"])
design = assemble_optimal([1.0, 1.0], spec, power(2))
print("row norms\n", design.solution.B)
print("optimal spectra", [np.round(s, 9) for s in design.solution.psi])
print("potential", design.potential, " tight", design.tight)
print("grid oracle", brute_force_oracle([1.0, 1.0], [0.5, 0.5], (1, 2), power(2)))

# uneven norms leave the design non-tight but still a frame
spec = FsiSpec.from_cells([0.2, 0.3, 0.4], [1, 2, 3])
alpha = [2.0, 1.0, 0.6, 0.3]
design = assemble_optimal(alpha, spec, exponential())
fb = frame_bounds(design.frame)
print(f"exp potential {design.potential:.6f} after {design.solution.iterations} iterations,"
      f" gap {design.solution.gap:.1e}")
print(f"frame bounds [{fb.lower:.4f}, {fb.upper:.4f}]")
for d, s, c in zip(design.rows, design.solution.psi, design.solution.levels):
    print(f"  dim {d}: spectrum {np.round(s, 6)}  level {c:.6f}")

sol = optimize_reduced(alpha, [0.2, 0.3, 0.4], (1, 2, 3), power(2), seed=3)
print("square potential from a random start:", round(sol.objective, 9))
