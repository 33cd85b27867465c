"""Waterfilling of step functions and the discrete map ``L_d``."""
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, PreconditionError, ValidationError
from .measure import ScalarField, majorizes, submajorizes

LEVEL_TOL = 1e-12
BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class WaterfillResult:
    level: float
    filled: ScalarField
    s0: float  # measure of {f > level}


def waterfill_at(f, c):
    """``f_c = max(f, c)`` cellwise."""
    if c < 0:
        raise ValidationError("waterfilling level must be non-negative")
    return ScalarField(f.domain, np.maximum(f.values, c))


def _filled_total(f, c):
    return float(np.dot(f.domain.p, np.maximum(f.values, c)))


def _exact_level(f, v):
    # phi_f(c) = sum p_i max(f_i, c) is piecewise linear with kinks at the values of f
    vals = np.unique(f.values)
    p = f.domain.p
    for k, lo in enumerate(vals):
        below = p[f.values <= lo].sum()
        base = _filled_total(f, lo)
        hi = vals[k + 1] if k + 1 < len(vals) else np.inf
        c = lo + (v - base) / below
        if c <= hi:
            return float(c)
    return float(vals[-1] + (v - _filled_total(f, vals[-1])) / p.sum())


def _bisect_level(f, v):
    lo = f.ess_inf()
    hi = lo + (v - f.integral()) / f.domain.total_weight + 1.0
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if _filled_total(f, mid) < v:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def level_for_total(f, v):
    """Unique level ``c >= ess-inf f`` with ``integral max(f, c) = v``.

    The filled integral is piecewise linear and strictly increasing in ``c``,
    so the level is solved exactly on the active segment; bisection takes over
    if the exact solve misses the tolerance.
    """
    total = f.integral()
    scale = max(1.0, abs(v))
    if v < total - LEVEL_TOL * scale:
        raise InfeasibleError(f"target {v} is below the integral {total} of the field")
    if v <= total:
        c = f.ess_inf()
    else:
        c = _exact_level(f, v)
        if abs(_filled_total(f, c) - v) > LEVEL_TOL * scale:
            c = _bisect_level(f, v)
    return WaterfillResult(c, waterfill_at(f, c), f.measure_above(c))


@dataclass(frozen=True)
class DiscreteWaterfill:
    """``L_d(gamma)`` with its level and the sorting permutation of ``gamma``.

    ``order[k]`` is the index in ``gamma`` of the k-th largest entry, so
    ``values[k]`` (for ``k < min(d, n)``) belongs to ``gamma[order[k]]``.
    """

    values: np.ndarray
    level: float
    order: np.ndarray


def discrete_waterfill_full(gamma, d):
    gamma = np.asarray(gamma, dtype=float).reshape(-1)
    if d < 1:
        raise ValidationError("d must be a positive integer")
    if np.any(gamma < 0):
        raise ValidationError("gamma must be non-negative")
    n = gamma.size
    order = np.argsort(-gamma, kind="stable")
    g = gamma[order]
    if d > n:
        return DiscreteWaterfill(np.concatenate([g, np.zeros(d - n)]), 0.0, order)
    # tail[k] = sum of g[k:], the mass below the k largest entries
    tail = np.concatenate([np.cumsum(g[::-1])[::-1], [0.0]])
    level = g[d - 1] + tail[d]
    for k in range(d):
        c = tail[k] / (d - k)
        if g[k] <= c:
            level = c
            break
    values = np.maximum(g[:d], level)
    return DiscreteWaterfill(values, float(level), order)


def discrete_waterfill(gamma, d):
    """``L_d(gamma)``: the d-vector ``max(gamma_desc_i, c)`` with trace preserved.

    For ``d > len(gamma)`` the sorted vector is padded with zeros.  When several
    levels satisfy the trace condition (zero tail), the largest one is used.
    """
    return discrete_waterfill_full(gamma, d).values


def check_waterfill_majorization(f, g, c, dlev, tol=1e-10):
    """Check ``f_c < g_dlev`` given ``f <_w g`` and equal filled integrals.

    Raises :class:`PreconditionError` when the hypotheses fail, so a false
    return always means the majorization itself failed.
    """
    if not submajorizes(f, g):
        raise PreconditionError("f is not submajorized by g")
    fc = waterfill_at(f, c)
    gd = waterfill_at(g, dlev)
    a, b = fc.integral(), gd.integral()
    if abs(a - b) > tol * max(1.0, abs(a), abs(b)):
        raise PreconditionError(f"filled integrals differ: {a} vs {b}")
    return majorizes(fc, gd)
