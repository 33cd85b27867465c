"""
Eigensteps
==========

The spectra of the partial frame operators ``S_j = sum_{k<=j} f_k f_k*``
interlace.  Conversely an interlacing table with the right column sums can be
completed one rank-one update at a time.
"""

import numpy as np

from framekit.eigensteps import EigenstepTable, eigensteps_of, realize_from_eigensteps, validate_eigensteps
from framekit.frame_design import FiberFrame, FsiSpec, extract_fine_structure

spec = FsiSpec.from_cells([1.0], [2])
table = EigenstepTable(([[1.0], [1.5, 0.5], [1.5, 1.5, 0.0]],))
norms = [np.ones(3)]
print(validate_eigensteps(table, [[1.5, 1.5]], norms, spec))

frame = realize_from_eigensteps(table, norms, spec)
np.set_printoptions(precision=4, suppress=True)
print("vectors (columns)\n", frame.fibers[0])
for j, col in enumerate(eigensteps_of(frame).steps[0], start=1):
    print(f"  spectrum of S_{j}: {col}")

# a random frame always produces a valid table
rng = np.random.default_rng(0)
t = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
rand = FiberFrame(FsiSpec.from_cells([1.0], [3]), (t,))
steps = eigensteps_of(rand)
fs = extract_fine_structure(rand)
print(validate_eigensteps(steps, fs.spectra, fs.norms, rand.spec))

# and the table determines the frame up to a unitary on each step
again = realize_from_eigensteps(steps, fs.norms, rand.spec)
err = max(np.max(np.abs(a - b)) for a, b in zip(eigensteps_of(again).steps[0], steps.steps[0]))
print("round trip", err)

# a broken table names the first failing position
broken = EigenstepTable(([[1.0], [1.8, 0.2], [1.5, 1.5, 0.0]],))
print(validate_eigensteps(broken, [[1.5, 1.5]], norms, spec).message)
