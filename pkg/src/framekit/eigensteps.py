"""Measurable eigensteps: validation, extraction from a frame and realization.

An eigenstep table lists, on every cell, the spectra of the partial frame
operators ``S_j = sum_{i <= j} f_i (x) f_i`` for ``j = 1..n``.  Column ``j``
holds ``j`` numbers (eigenvalues beyond the fiber dimension are zero).
Realization adds one rank-one term per step; its coordinates in the current
eigenbasis come from the secular equation of a rank-one update.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InterlacingError, ValidationError
from .fiber_algebra import frame_operator, hermitian_eig
from .frame_design import FiberFrame, FineStructure, admissible, cell_spectrum, map_cells

STEP_TOL = 1e-10
CLUSTER_TOL = 1e-10


@dataclass(frozen=True)
class EigenstepTable:
    """``steps[c][j]`` is the spectrum (length ``j + 1``) after ``j + 1`` vectors on cell ``c``."""

    steps: tuple

    def __post_init__(self):
        cells = []
        for cell in self.steps:
            cols = tuple(np.array(col, dtype=float).reshape(-1) for col in cell)
            for j, col in enumerate(cols):
                if col.size != j + 1:
                    raise ValidationError(f"step {j + 1} must list {j + 1} eigenvalues, got {col.size}")
            cells.append(cols)
        if len({len(c) for c in cells}) > 1:
            raise ValidationError("every cell needs the same number of steps")
        object.__setattr__(self, "steps", tuple(cells))

    @property
    def n(self):
        return len(self.steps[0]) if self.steps else 0

    def terminal(self, spec):
        """Final spectra truncated or zero-padded to the fiber dimensions."""
        out = []
        for cell, d in zip(self.steps, spec.dims):
            last = cell[-1]
            out.append(np.concatenate([last, np.zeros(max(d - last.size, 0))])[:d])
        return out

    def to_lists(self):
        return [[col.tolist() for col in cell] for cell in self.steps]


@dataclass(frozen=True)
class EigenstepReport:
    """Outcome of :func:`validate_eigensteps`; truthy when the table is valid.

    ``condition`` is one of ``"shape"``, ``"admissibility"``, ``"interlacing"``,
    ``"trace"``, ``"terminal"`` (or ``None``); ``i`` and ``j`` are 1-based.
    """

    ok: bool
    condition: str = None
    cell: object = None
    i: int = None
    j: int = None
    message: str = ""

    def __bool__(self):
        return self.ok


def _tol(*arrays):
    return STEP_TOL * max([1.0] + [float(np.max(np.abs(a))) for a in arrays if np.size(a)])


def validate_eigensteps(table, lambda_target, alpha, spec):
    """Check a table against the three defining conditions on every cell.

    1. interlacing ``lambda_{i,j+1} >= lambda_{i,j} >= lambda_{i+1,j+1}``;
    2. column sums ``sum_i lambda_{i,j} = sum_{i <= j} alpha_i``;
    3. the last column equals ``lambda_target`` (padded with zeros past the fiber).

    ``lambda_target[c]`` has length ``d_c`` and ``alpha[c]`` length ``n``;
    ``(lambda_target, alpha)`` must itself be admissible.  Returns an
    :class:`EigenstepReport` naming the first violation.
    """
    labels = spec.labels
    if len(table.steps) != len(spec) or len(lambda_target) != len(spec) or len(alpha) != len(spec):
        return EigenstepReport(False, "shape", message="table, targets and norms need one entry per cell")
    n = table.n
    try:
        fs = FineStructure(tuple(alpha), tuple(lambda_target))
        ok = fs.n == n and admissible(fs, spec)
    except ValidationError as exc:
        return EigenstepReport(False, "admissibility", message=str(exc))
    if not ok:
        return EigenstepReport(False, "admissibility", message="(lambda, alpha) is not admissible")
    for c, (cell, lam, a) in enumerate(zip(table.steps, fs.spectra, fs.norms)):
        tol = _tol(lam, a, *cell)
        for j, col in enumerate(cell):
            if np.any(col < -tol):
                i = int(np.argmin(col))
                return EigenstepReport(False, "interlacing", labels[c], i + 1, j + 1,
                                       f"negative eigenvalue at (i={i + 1}, j={j + 1}) on cell {labels[c]!r}")
        for j in range(n - 1):
            cur, nxt = cell[j], cell[j + 1]
            for i in range(j + 1):
                if not (nxt[i] >= cur[i] - tol and cur[i] >= nxt[i + 1] - tol):
                    return EigenstepReport(
                        False, "interlacing", labels[c], i + 1, j + 1,
                        f"interlacing fails at (i={i + 1}, j={j + 1}) on cell {labels[c]!r}: "
                        f"{nxt[i]} >= {cur[i]} >= {nxt[i + 1]} is false")
        partial = np.cumsum(a)
        for j, col in enumerate(cell):
            if abs(col.sum() - partial[j]) > tol:
                return EigenstepReport(
                    False, "trace", labels[c], None, j + 1,
                    f"column {j + 1} on cell {labels[c]!r} sums to {col.sum()}, expected {partial[j]}")
        last = cell[-1]
        padded = np.concatenate([lam, np.zeros(max(n - lam.size, 0))])
        extra = np.concatenate([last, np.zeros(max(lam.size - n, 0))])
        bad = np.nonzero(np.abs(extra - padded[:extra.size]) > tol)[0]
        if bad.size:
            i = int(bad[0])
            return EigenstepReport(False, "terminal", labels[c], i + 1, n,
                                   f"final spectrum differs from the target at i={i + 1} on cell {labels[c]!r}")
    return EigenstepReport(True)


def eigensteps_of(frame):
    """The eigenstep table associated with the order of the vectors in ``frame``."""
    cells = []
    for t in frame.fibers:
        d = t.shape[0]
        cols = []
        for j in range(1, t.shape[1] + 1):
            lam = cell_spectrum(t[:, :j])
            col = np.zeros(j)
            k = min(d, j)
            col[:k] = lam[:k]
            cols.append(col)
        cells.append(tuple(cols))
    return EigenstepTable(tuple(cells))


def rank_one_completion(lambda_cur, mu_target, basis=None):
    """Vector ``g`` with ``eig(diag(lambda_cur) + g g*) = mu_target``.

    Both spectra are non-increasing of the same length and must interlace:
    ``mu_1 >= lambda_1 >= mu_2 >= ... >= mu_d >= lambda_d``.  Repeated values
    of ``lambda`` are deflated (all but one copy get a zero coordinate, the
    matching copies of ``mu`` are removed) and the remaining coordinates come
    from ``|g_k|^2 = -prod_i (lambda_k - mu_i) / prod_{i != k} (lambda_k - lambda_i)``.
    The result is expressed in ``basis`` (columns) when given.
    """
    lam = np.asarray(lambda_cur, dtype=float).reshape(-1)
    mu = np.asarray(mu_target, dtype=float).reshape(-1)
    d = lam.size
    if mu.size != d or d == 0:
        raise ValidationError("lambda and mu must be non-empty and of equal length")
    tol = _tol(lam, mu)
    if np.any(np.diff(lam) > tol) or np.any(np.diff(mu) > tol):
        raise ValidationError("lambda and mu must be sorted non-increasingly")
    for i in range(d):
        if mu[i] < lam[i] - tol:
            raise InterlacingError(f"mu_{i + 1} = {mu[i]} < lambda_{i + 1} = {lam[i]}", i + 1)
        if i + 1 < d and lam[i] < mu[i + 1] - tol:
            raise InterlacingError(f"lambda_{i + 1} = {lam[i]} < mu_{i + 2} = {mu[i + 1]}", i + 1)
    # clusters of (numerically) equal lambda; a cluster a..b forces mu_{a+1..b} = lambda_a
    starts = [0] + [k for k in range(1, d) if lam[k - 1] - lam[k] > CLUSTER_TOL * max(1.0, abs(lam[0]))]
    reps = np.array(starts)
    lam_red = lam[reps]
    mu_red = np.array([mu[a] for a in starts])
    g2 = np.zeros(d)
    for k, a in enumerate(starts):
        num = -np.prod(lam_red[k] - mu_red)
        others = np.delete(lam_red, k)
        den = np.prod(lam_red[k] - others)
        val = num / den
        if val < 0:
            if val < -tol:
                raise InterlacingError(f"secular weight {val} is negative at lambda_{a + 1}", a + 1)
            val = 0.0
        g2[a] = val
    g = np.sqrt(np.abs(g2)).astype(complex)
    if basis is not None:
        g = np.asarray(basis, dtype=complex) @ g
    return g


def realize_from_eigensteps(table, alpha, spec, max_workers=1):
    """Fibers whose partial frame operators have the spectra listed in ``table``.

    ``alpha[c]`` holds the prescribed fiber norms on cell ``c``.  Vector ``j+1``
    is the rank-one completion from the spectrum of ``S_j`` to column ``j+1``,
    written in the computed eigenbasis of ``S_j``.
    """
    report = validate_eigensteps(table, table.terminal(spec), alpha, spec)
    if not report:
        raise ValidationError(f"invalid eigenstep table ({report.condition}): {report.message}")
    fibers = map_cells(_realize_cell, zip(table.steps, alpha, spec.dims), max_workers)
    return FiberFrame(spec, tuple(fibers))


def _realize_cell(cell, a, d):
    n = len(cell)
    t = np.zeros((d, n), dtype=complex)
    t[0, 0] = np.sqrt(float(np.asarray(a, dtype=float)[0]))
    for j in range(1, n):
        eig = hermitian_eig(frame_operator(t[:, :j]))
        t[:, j] = rank_one_completion(_fit(cell[j - 1], d), _fit(cell[j], d), eig.eigenvectors)
    return t


def _fit(col, d):
    # truncate (entries past d vanish) or pad a step column to the fiber dimension
    out = np.zeros(d)
    k = min(d, col.size)
    out[:k] = col[:k]
    return np.maximum(out, 0.0)


def additive_model_membership(s_spectra, mu, m, dims):
    """Whether some ``S + B`` (``B >= 0``, ``rank B(x) <= d(x) - m(x)``) has fiber spectra ``mu``.

    Per cell with fiber dimension ``d`` (``d = 0`` means outside the spectrum,
    where ``mu`` must vanish): ``mu`` is zero past ``d``; ``mu_i >= lambda_i``
    for ``i <= d``; and when ``1 <= m <= d`` also
    ``lambda_i >= mu_{d - m + i}`` for ``i <= m``.
    """
    if not (len(s_spectra) == len(mu) == len(m) == len(dims)):
        raise ValidationError("one entry per cell is required")
    for lam, mu_c, m_c, d in zip(s_spectra, mu, m, dims):
        mu_c = np.asarray(mu_c, dtype=float).reshape(-1)
        lam = np.asarray(lam, dtype=float).reshape(-1)
        tol = _tol(lam, mu_c)
        if np.any(np.diff(mu_c) > tol):
            raise ValidationError("mu must be sorted non-increasingly")
        if m_c > d:
            raise ValidationError("m(x) must not exceed d(x)")
        if np.any(np.abs(mu_c[d:]) > tol):
            return False
        if d == 0:
            continue
        lam_d = np.concatenate([lam, np.zeros(max(d - lam.size, 0))])[:d]
        mu_d = np.concatenate([mu_c, np.zeros(max(d - mu_c.size, 0))])[:d]
        if np.any(mu_d < lam_d - tol):
            return False
        if m_c >= 1:
            for i in range(m_c):
                if lam_d[i] < mu_d[d - m_c + i] - tol:
                    return False
    return True
