"""Dense complex linear algebra on single fibers.

Fibers are small (a handful of dimensions), so the eigensolver is a plain
cyclic Jacobi iteration: robust, deterministic and accurate to machine
precision on Hermitian input.

A collection of fiber vectors is passed either as a sequence of 1-D arrays or
as a ``d x n`` synthesis matrix whose columns are the vectors.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import ValidationError

HERMITIAN_ATOL = 1e-12
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (non-increasing) and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _as_hermitian(a):
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_ATOL * scale:
        raise ValidationError("matrix is not Hermitian")
    return 0.5 * (a + a.conj().T)


def _fix_phases(v):
    # largest-modulus entry of each column made real positive (first one on ties)
    idx = np.argmax(np.abs(v), axis=0)
    pivots = v[idx, np.arange(v.shape[1])]
    mags = np.abs(pivots)
    mags[mags == 0] = 1.0
    return v * (pivots.conj() / mags)


def hermitian_eig(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.

    Returns a :class:`SpectralDecomposition` with eigenvalues sorted
    non-increasingly (stable on ties) and eigenvector phases normalised so the
    largest-modulus entry of each column is real and positive.
    """
    a = _as_hermitian(a)
    d = a.shape[0]
    scale = float(np.linalg.norm(a))
    # plain Python rows: far cheaper than numpy slicing for d of a few units
    m = a.tolist()
    v = np.eye(d, dtype=complex).tolist()
    if d > 1 and scale > 0:
        for _ in range(max_sweeps):
            off = math.sqrt(sum(abs(m[i][j]) ** 2 for i in range(d) for j in range(d) if i != j))
            if off <= tol * scale:
                break
            for p in range(d - 1):
                for q in range(p + 1, d):
                    apq = m[p][q]
                    mag = abs(apq)
                    if mag == 0.0:
                        continue
                    ph = apq / mag
                    cph = ph.conjugate()
                    tau = (m[q][q].real - m[p][p].real) / (2.0 * mag)
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                    c = 1.0 / math.sqrt(1.0 + t * t)
                    s = t * c
                    # A <- R* A R with R = [[c, s], [-s conj(ph), c conj(ph)]] on (p, q)
                    scph = s * cph
                    ccph = c * cph
                    for row in m:
                        ap, aq = row[p], row[q]
                        row[p] = c * ap - scph * aq
                        row[q] = s * ap + ccph * aq
                    rp, rq = m[p], m[q]
                    sph = s * ph
                    cph_ = c * ph
                    for k in range(d):
                        x, y = rp[k], rq[k]
                        rp[k] = c * x - sph * y
                        rq[k] = s * x + cph_ * y
                    rp[q] = rq[p] = 0j
                    rp[p] = complex(rp[p].real)
                    rq[q] = complex(rq[q].real)
                    for row in v:
                        vp, vq = row[p], row[q]
                        row[p] = c * vp - scph * vq
                        row[q] = s * vp + ccph * vq
    a = np.array(m, dtype=complex)
    v = np.array(v, dtype=complex)
    w = np.real(np.diag(a)).copy()
    order = np.argsort(-w, kind="stable")
    return SpectralDecomposition(w[order], _fix_phases(v[:, order]))


def eigenvalues(a):
    """Non-increasing eigenvalues of a Hermitian matrix."""
    return hermitian_eig(a).eigenvalues


def as_synthesis(vectors, dim=None):
    """Stack fiber vectors as the columns of a ``d x n`` complex matrix."""
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        t = vectors.astype(complex)
    else:
        vecs = [np.atleast_1d(np.asarray(x, dtype=complex)) for x in vectors]
        if not vecs:
            if dim is None:
                raise ValidationError("cannot infer the dimension of an empty vector list")
            return np.zeros((dim, 0), dtype=complex)
        lengths = {x.shape for x in vecs}
        if len(lengths) != 1 or vecs[0].ndim != 1:
            raise ValidationError(f"vectors have mismatched dimensions: {sorted(lengths)}")
        t = np.stack(vecs, axis=1)
    if dim is not None and t.shape[0] != dim:
        raise ValidationError(f"expected vectors in C^{dim}, got C^{t.shape[0]}")
    return t


def rank_one(x, y=None):
    """The operator ``z -> <z, y> x`` as a matrix (``y`` defaults to ``x``)."""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    y = x if y is None else np.atleast_1d(np.asarray(y, dtype=complex))
    return np.outer(x, y.conj())


def frame_operator(vectors, dim=None):
    """Sum of ``f_j (x) f_j`` over the vectors: ``T T*``."""
    t = as_synthesis(vectors, dim)
    s = t @ t.conj().T
    return 0.5 * (s + s.conj().T)


def gram(vectors, dim=None):
    """Gram matrix ``G[i, j] = <f_i, f_j>`` (inner product linear in the first slot)."""
    t = as_synthesis(vectors, dim)
    g = t.T @ t.conj()
    return 0.5 * (g + g.conj().T)
