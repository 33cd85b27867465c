"""Constructive Schur-Horn theorem and unit-vector synthesis with prescribed weights.

``schur_horn_unitary(b, c)`` returns ``U`` with ``diag(U* D_b U) = c`` whenever
``c`` is majorized by ``b``, following the classical induction: a 2x2 rotation
fixes the first diagonal entry and the remaining ``(d-1)``-problem is solved
recursively.  ``synthesis_vectors(b, c)`` turns such a unitary into unit
vectors ``u_j`` with ``D_b = sum_j c_j u_j u_j*``.
"""
from dataclasses import dataclass
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import MajorizationError, ValidationError
from .measure import vector_majorize

TIE_TOL = 1e-12


def _clamped_sqrt(x):
    return math.sqrt(max(x, 0.0))


def two_by_two_block(b1, b2, c1_target):
    """Real rotation ``U`` with ``diag(U* diag(b1, b2) U) = (c1, b1 + b2 - c1)``.

    Requires ``b1 >= b2`` and ``b2 <= c1 <= b1``.  For ``b1 == b2`` (within
    tolerance) the identity is returned.
    """
    b1, b2, c1 = float(b1), float(b2), float(c1_target)
    scale = TIE_TOL * max(1.0, abs(b1), abs(b2))
    if b1 < b2 - scale:
        raise ValidationError("two_by_two_block expects b1 >= b2")
    if not (b2 - scale <= c1 <= b1 + scale):
        raise MajorizationError(f"({c1}, {b1 + b2 - c1}) is not majorized by ({b1}, {b2})")
    if b1 - b2 <= scale:
        return np.eye(2)
    c2 = b1 + b2 - c1
    # entry (2,1) uses sqrt(c2 - b2); the printed sqrt(b2 - c2) would be imaginary
    x = _clamped_sqrt(b1 - c2)
    y = _clamped_sqrt(c2 - b2)
    return np.array([[x, -y], [y, x]]) / math.sqrt(b1 - b2)


def dft_matrix(n):
    """``n^{-1/2} (w^{jk})`` with ``w = exp(-2 pi i / n)``."""
    jk = np.outer(np.arange(n), np.arange(n))
    return np.exp(-2j * np.pi * jk / n) / math.sqrt(n)


def _sh_sorted(b, c):
    # b, c non-increasing, c < b; returns U with diag(U* D_b U) = c
    n = b.size
    if n == 1:
        return np.eye(1, dtype=complex)
    scale = TIE_TOL * max(1.0, float(np.abs(b).max()))
    if b[0] - b[-1] <= scale:
        return np.eye(n, dtype=complex)
    if c[0] - c[-1] <= scale:
        return dft_matrix(n)
    if n == 2:
        return two_by_two_block(b[0], b[1], c[0]).astype(complex)
    # largest k with b_k >= c_1; 1 <= k <= n-1 since b_1 >= c_1 > c_n >= b_n
    k = int(np.nonzero(b >= c[0] - scale)[0].max())
    k = min(k, n - 2)
    eta = b[k] + b[k + 1] - c[0]
    u1 = two_by_two_block(b[k], b[k + 1], c[0])
    rest = [i for i in range(n) if i not in (k, k + 1)]
    perm = np.eye(n)[:, [k, k + 1] + rest]
    gamma = np.concatenate([[eta], b[rest]])
    u2 = schur_horn_unitary(gamma, c[1:], check=False)
    left = np.eye(n, dtype=complex)
    left[:2, :2] = u1
    right = np.eye(n, dtype=complex)
    right[1:, 1:] = u2
    return perm @ left @ right


def schur_horn_unitary(b, c, check=True):
    """Unitary ``U`` with ``diag(U* diag(b) U) = c``, for ``c`` majorized by ``b``.

    ``b`` and ``c`` may be in any order; both are sorted internally and the
    permutations undone on output.
    """
    b = np.asarray(b, dtype=float).reshape(-1)
    c = np.asarray(c, dtype=float).reshape(-1)
    if b.size != c.size or b.size == 0:
        raise ValidationError("b and c must be non-empty and of equal length")
    if check and not vector_majorize(c, b):
        raise MajorizationError("c is not majorized by b")
    ob = np.argsort(-b, kind="stable")
    oc = np.argsort(-c, kind="stable")
    us = _sh_sorted(b[ob], c[oc])
    n = b.size
    pb = np.eye(n)[:, ob]
    qc = np.eye(n)[:, oc]
    return pb @ us @ qc.T


@dataclass(frozen=True)
class Synthesis:
    """Unit vectors (columns of ``vectors``, shape ``d x n``) with ``D_b = sum c_j u_j u_j*``.

    ``zero_weight[j]`` marks columns with ``c_j = 0``; their vector is an
    arbitrary unit vector and carries no weight.
    """

    vectors: np.ndarray
    zero_weight: np.ndarray


def synthesis_vectors(b, c):
    """Unit vectors ``u_1..u_n`` in ``C^d`` with ``diag(b) = sum_j c_j u_j u_j*``.

    ``b`` (length d) and ``c`` (length n) must be non-negative with ``c``
    majorized by ``b`` in the cross-length sense.  For ``n < d`` the weights are
    padded with zeros; for ``n >= d`` the diagonal is padded and the trailing
    ``n - d`` coordinates (which vanish) are dropped.
    """
    b = np.asarray(b, dtype=float).reshape(-1)
    c = np.asarray(c, dtype=float).reshape(-1)
    d, n = b.size, c.size
    if d == 0 or n == 0:
        raise ValidationError("b and c must be non-empty")
    tol = TIE_TOL * max(1.0, float(b.sum()))
    if np.any(b < -tol) or np.any(c < -tol):
        raise ValidationError("b and c must be non-negative")
    b = np.maximum(b, 0.0)
    c = np.maximum(c, 0.0)
    if not vector_majorize(c, b):
        raise MajorizationError("weights c are not majorized by the diagonal b")
    ob = np.argsort(-b, kind="stable")
    oc = np.argsort(-c, kind="stable")
    bs, cs = b[ob], c[oc]
    size = max(d, n)
    bt = np.concatenate([bs, np.zeros(size - d)])
    ct = np.concatenate([cs, np.zeros(size - n)])
    u = _sh_sorted(bt, ct)
    cols = (np.sqrt(bt)[:, None] * u)[:d, :n]
    norms = np.linalg.norm(cols, axis=0)
    zero = cs <= tol
    vecs = np.zeros((d, n), dtype=complex)
    vecs[:, ~zero] = cols[:, ~zero] / norms[~zero]
    vecs[0, zero] = 1.0
    out = np.zeros((d, n), dtype=complex)
    out[ob, :] = vecs  # undo the sort of b (row k of the sorted problem is coordinate ob[k])
    result = np.zeros((d, n), dtype=complex)
    result[:, oc] = out  # column k belongs to weight c[oc[k]]
    flags = np.zeros(n, dtype=bool)
    flags[oc] = zero
    return Synthesis(result, flags)


def field_schur_horn(b_cells, c_cells, labels=None, mode="unitary", max_workers=1):
    """Apply :func:`schur_horn_unitary` (``mode='unitary'``) or
    :func:`synthesis_vectors` (``mode='vectors'``) on every cell.

    Failures are re-raised naming the first offending cell label.
    """
    if len(b_cells) != len(c_cells):
        raise ValidationError("b and c need one entry per cell")
    labels = list(range(len(b_cells))) if labels is None else list(labels)
    op = {"unitary": schur_horn_unitary, "vectors": synthesis_vectors}[mode]

    def run(i):
        try:
            return op(b_cells[i], c_cells[i])
        except ValidationError as exc:
            raise type(exc)(f"cell {labels[i]!r}: {exc}") from exc

    idx = range(len(b_cells))
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            return list(pool.map(run, idx))
    return [run(i) for i in idx]
