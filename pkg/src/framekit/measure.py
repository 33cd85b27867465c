"""Atomized measure spaces, decreasing rearrangements and majorization.

Every measurable function used by the library is piecewise constant on a
finite weighted partition, so rearrangements are step functions and all
majorization tests reduce to exact comparisons at finitely many breakpoints.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

MAJORIZATION_TOL = 1e-12


@dataclass(frozen=True)
class AtomizedDomain:
    """Finite partition into cells of positive measure.

    ``weights[i]`` is the measure of cell ``i``.  Labels default to
    ``0, 1, ...`` and must be unique.  Domains built for the torus carry total
    mass at most one (checked by :class:`framekit.frame_design.FsiSpec`);
    product domains ``Z x {1..r}`` built by :meth:`product` may exceed it.
    """

    weights: tuple
    labels: tuple = None

    def __post_init__(self):
        w = tuple(float(x) for x in np.atleast_1d(np.asarray(self.weights, dtype=float)))
        if not w:
            raise ValidationError("a domain needs at least one cell")
        if not all(np.isfinite(x) and x > 0 for x in w):
            raise ValidationError("cell weights must be finite and strictly positive")
        labels = tuple(range(len(w))) if self.labels is None else tuple(self.labels)
        if len(labels) != len(w):
            raise ValidationError("one label per cell is required")
        if len(set(labels)) != len(labels):
            raise ValidationError("cell labels must be unique")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.weights)

    @property
    def p(self):
        return np.array(self.weights)

    @property
    def total_weight(self):
        return float(sum(self.weights))

    def product(self, r):
        """The domain ``Z x {1..r}`` with product (counting) measure, cell-major order."""
        if r < 1:
            raise ValidationError("r must be a positive integer")
        weights = [w for w in self.weights for _ in range(r)]
        labels = [(lab, j) for lab in self.labels for j in range(r)]
        return AtomizedDomain(tuple(weights), tuple(labels))


@dataclass(frozen=True)
class ScalarField:
    """A non-negative function that is constant on each cell of ``domain``."""

    domain: AtomizedDomain
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.shape[0] != len(self.domain):
            raise ValidationError(f"expected {len(self.domain)} values, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("field values must be finite")
        if np.any(v < 0):
            raise ValidationError("field values must be non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, weights, values):
        return cls(AtomizedDomain(tuple(weights)), values)

    def integral(self):
        return float(np.dot(self.domain.p, self.values))

    def measure_above(self, t):
        """Measure of ``{f > t}``."""
        return float(self.domain.p[self.values > t].sum())

    def ess_inf(self):
        return float(self.values.min())


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous non-increasing step function on ``[edges[0], edges[-1])``.

    ``values[k]`` is taken on ``[edges[k], edges[k+1])``.
    """

    edges: np.ndarray
    values: np.ndarray

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self.edges, s, side="right") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        return self.values[idx]

    @property
    def length(self):
        return float(self.edges[-1] - self.edges[0])

    def cumulative(self, s):
        """``integral_0^s f*(t) dt`` for ``s`` in ``[0, length]``."""
        s = np.clip(np.asarray(s, dtype=float), self.edges[0], self.edges[-1])
        widths = np.diff(self.edges)
        cum = np.concatenate([[0.0], np.cumsum(widths * self.values)])
        idx = np.clip(np.searchsorted(self.edges, s, side="right") - 1, 0, len(self.values) - 1)
        return cum[idx] + (s - self.edges[idx]) * self.values[idx]

    def measure_above(self, t):
        """Lebesgue measure of ``{f* > t}``."""
        return float(np.diff(self.edges)[self.values > t].sum())


def decreasing_rearrangement(f, normalize=True):
    """Decreasing rearrangement ``f*(s) = sup{t : mu{f > t} > s}``.

    With ``normalize`` the cell weights are divided by the total mass so the
    result lives on ``[0, 1)``; otherwise it lives on ``[0, total_weight)``.
    Equal values are merged into one step.
    """
    if len(f.domain) == 0:
        raise ValidationError("empty domain")
    w = f.domain.p
    if normalize:
        w = w / w.sum()
    order = np.argsort(-f.values, kind="stable")
    vals = f.values[order]
    widths = w[order]
    keep = np.concatenate([[True], vals[1:] != vals[:-1]])
    group = np.cumsum(keep) - 1
    merged_vals = vals[keep]
    merged_w = np.bincount(group, weights=widths)
    edges = np.concatenate([[0.0], np.cumsum(merged_w)])
    return StepFunction(edges, merged_vals)


def integral_of(phi, f):
    """``integral phi(f) dmu`` over the (unnormalized) domain."""
    return float(np.dot(f.domain.p, np.asarray(phi(f.values), dtype=float)))


def _cumulative_pair(g, f):
    if not np.isclose(g.domain.total_weight, f.domain.total_weight, rtol=1e-12, atol=0):
        raise ValidationError("majorization needs domains of equal total mass")
    gs = decreasing_rearrangement(g, normalize=True)
    fs = decreasing_rearrangement(f, normalize=True)
    s = np.union1d(gs.edges, fs.edges)
    return gs.cumulative(s), fs.cumulative(s)


def _tol(*arrays):
    scale = max([1.0] + [float(np.max(np.abs(a))) for a in arrays if np.size(a)])
    return MAJORIZATION_TOL * scale


def submajorizes(g, f):
    """True when ``g`` is submajorized by ``f`` (``g <_w f``) in the normalized measure.

    Compares ``integral_0^s g*`` with ``integral_0^s f*`` at every breakpoint of
    either rearrangement; both cumulative integrals are piecewise linear, so
    this is exact.
    """
    cg, cf = _cumulative_pair(g, f)
    return bool(np.all(cg <= cf + _tol(cf, cg)))


def majorizes(g, f):
    """True when ``g`` is majorized by ``f`` (``g < f``): submajorized with equal integrals."""
    cg, cf = _cumulative_pair(g, f)
    tol = _tol(cf, cg)
    return bool(np.all(cg <= cf + tol) and abs(cg[-1] - cf[-1]) <= tol)


def vector_majorize(a, b, tol=MAJORIZATION_TOL):
    """True when ``a`` (length n) is majorized by ``b`` (length m).

    Partial sums of the decreasing rearrangements are compared up to
    ``min(n, m)`` and the full sums must agree; the lengths may differ.
    """
    a = np.sort(np.asarray(a, dtype=float).reshape(-1))[::-1]
    b = np.sort(np.asarray(b, dtype=float).reshape(-1))[::-1]
    k = min(a.size, b.size)
    t = tol * max(1.0, float(np.abs(a).sum()), float(np.abs(b).sum()))
    ca = np.cumsum(a[:k])
    cb = np.cumsum(b[:k])
    return bool(np.all(ca <= cb + t) and abs(a.sum() - b.sum()) <= t)


def vector_submajorize(a, b, tol=MAJORIZATION_TOL):
    """True when ``a <_w b`` (partial sums only, up to ``min(n, m)``)."""
    a = np.sort(np.asarray(a, dtype=float).reshape(-1))[::-1]
    b = np.sort(np.asarray(b, dtype=float).reshape(-1))[::-1]
    k = min(a.size, b.size)
    t = tol * max(1.0, float(np.abs(a).sum()), float(np.abs(b).sum()))
    return bool(np.all(np.cumsum(a[:k]) <= np.cumsum(b[:k]) + t))


def average_map(h, base, r):
    """Doubly stochastic averaging on ``base x {1..r}``.

    Each slice ``{(x, j) : x in base}`` is replaced by its weighted mean over
    the cells of ``base``.  The map is unital, positive and trace preserving,
    so the output is majorized by ``h``.
    """
    expected = base.product(r)
    if h.domain != expected:
        raise ValidationError("field is not defined on the product domain base x {1..r}")
    vals = h.values.reshape(len(base), r)
    p = base.p
    means = p @ vals / p.sum()
    return ScalarField(expected, np.tile(means, len(base)))
