"""
Unitaries with a prescribed diagonal
====================================

Given eigenvalues ``b`` and a target diagonal ``c`` majorized by ``b``, build
a unitary ``U`` with ``diag(U* diag(b) U) = c``, then turn it into unit vectors
whose weighted outer products sum to ``diag(b)``.
"""

import numpy as np

from framekit.errors import MajorizationError
from framekit.schur_horn import schur_horn_unitary, synthesis_vectors

b = np.array([5.0, 3.0, 1.0, 0.0])
c = np.array([2.5, 2.5, 2.0, 2.0])
u = schur_horn_unitary(b, c)
np.set_printoptions(precision=4, suppress=True)
print("U =\n", u)
print("diagonal of U* D_b U:", np.diag(u.conj().T @ np.diag(b) @ u).real)
print("unitarity residual", np.max(np.abs(u.conj().T @ u - np.eye(4))))

# more weights than dimensions: six unit vectors in C^4
c6 = np.array([2.0, 2.0, 1.5, 1.5, 1.0, 1.0])
s = synthesis_vectors(b, c6)
frame_op = (s.vectors * c6) @ s.vectors.conj().T
print("synthesis residual", np.max(np.abs(frame_op - np.diag(b))))
print("column norms", np.linalg.norm(s.vectors, axis=0))

# a diagonal that is not majorized is refused
try:
    schur_horn_unitary([2.0, 1.0], [3.0, 0.0])
except MajorizationError as exc:
    print("refused:", exc)
