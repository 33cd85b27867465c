"""Optimal designs: the reduced finite-dimensional model and its solvers.

Candidate optimal spectra are parametrized by non-negative matrices ``B``
(rows = distinct fiber dimensions ``delta_1 < ... < delta_m`` with weights
``p_i``, columns = generators) whose weighted column sums are the prescribed
norms: ``p^T B = alpha``.  Row ``i`` is mapped to the spectrum
``L_{delta_i}(B_i)`` by the discrete waterfill and the objective is
``sum_i p_i tr phi(L_{delta_i}(B_i))``, a convex function of ``B``.

Minimization uses pairwise Frank-Wolfe on the product of column simplices:
mass ``p_i B_ij`` moves within one column from the row with the largest
partial derivative (among rows holding mass) to the row with the smallest,
with an exact line search on the monotone directional derivative.
"""
from dataclasses import dataclass, field
import itertools

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, ValidationError
from .frame_design import FineStructure, FsiSpec, frame_bounds, potential, realize
from .waterfilling import discrete_waterfill_full

FEASIBILITY_TOL = 1e-10
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000
MAX_GRID_POINTS = 5_000_000
# relative spread below which a spectrum counts as flat; optimal spectra are only gap-accurate
TIGHT_TOL = 1e-6


def _as_vector(x, name):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise ValidationError(f"{name} must be a non-empty finite vector")
    return x


def _check_delta(delta):
    delta = tuple(int(d) for d in delta)
    if not delta or delta[0] < 1 or any(a >= b for a, b in zip(delta, delta[1:])):
        raise ValidationError("delta must be strictly increasing positive integers")
    return delta


@dataclass(frozen=True)
class WeightMatrix:
    """A point of ``{B >= 0 : p^T B = alpha}``."""

    B: np.ndarray
    p: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        b = np.array(self.B, dtype=float)
        p = _as_vector(self.p, "p")
        alpha = _as_vector(self.alpha, "alpha")
        if b.ndim != 2 or b.shape != (p.size, alpha.size):
            raise ValidationError(f"B must have shape ({p.size}, {alpha.size}), got {b.shape}")
        if np.any(p <= 0):
            raise ValidationError("row weights p must be positive")
        if np.any(b < 0):
            raise ValidationError("B must be entrywise non-negative")
        resid = np.abs(p @ b - alpha)
        if np.any(resid > FEASIBILITY_TOL * np.maximum(1.0, np.abs(alpha))):
            raise ValidationError(f"p^T B differs from alpha by {resid.max():.3e}")
        for arr in (b, p, alpha):
            arr.setflags(write=False)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "alpha", alpha)

    @property
    def shape(self):
        return self.B.shape


def _row_level(gamma, d):
    # largest c with sum_{j <= min(d, n)} max(gamma_j, c) = tr gamma
    if d > gamma.size:
        return float(gamma.min())
    return discrete_waterfill_full(gamma, d).level


def reduced_spectra(wm, delta):
    """``[L_{delta_i}(B_i)]``, one non-increasing vector of length ``delta_i`` per row."""
    delta = _check_delta(delta)
    if len(delta) != wm.shape[0]:
        raise ValidationError("one dimension per row of B is required")
    return [discrete_waterfill_full(row, d).values for row, d in zip(wm.B, delta)]


def reduced_objective(wm, delta, phi):
    """``sum_i p_i tr phi(L_{delta_i}(B_i))``."""
    psi = reduced_spectra(wm, delta)
    return float(sum(pi * np.sum(phi(s)) for pi, s in zip(wm.p, psi)))


def _row_derivative(row, d, phi):
    # d/dB_j tr phi(L_d(row)): phi'(max(B_j, c)); below-water entries share phi'(c)
    if d > row.size:
        return phi.derivative(row)
    c = discrete_waterfill_full(row, d).level
    return phi.derivative(np.maximum(row, c))


def reduced_gradient(wm, delta, phi):
    """Gradient (a subgradient for non-smooth ``phi``) of :func:`reduced_objective` in ``B``."""
    delta = _check_delta(delta)
    return np.array([pi * _row_derivative(row, d, phi) for pi, row, d in zip(wm.p, wm.B, delta)])


def duality_gap(wm, delta, phi):
    """Frank-Wolfe gap ``sum_j [sum_i B_ij G_ij - alpha_j min_i G_ij / p_i]`` at ``wm``."""
    G = reduced_gradient(wm, delta, phi)
    return max(_fw_gap(wm.B, G, wm.p, wm.alpha), 0.0)


@dataclass(frozen=True)
class UniformOptimum:
    spectrum: np.ndarray
    level: float
    tight: bool


def uniform_optimal(alpha, d, p=1.0):
    """Optimal spectrum for a single fiber dimension ``d`` on a set of measure ``p``.

    ``spectrum_j = max(alpha_j / p, c)`` for ``j <= min(n, d)`` and zero beyond,
    where ``c`` preserves the trace.  For ``d >= n`` every ``c <= min(alpha)/p``
    works and the largest is reported.
    """
    alpha = _as_vector(alpha, "alpha")
    if np.any(alpha <= 0):
        raise ValidationError("norms must be positive")
    if not p > 0:
        raise ValidationError("p must be positive")
    gamma = alpha / p
    spectrum = discrete_waterfill_full(gamma, int(d)).values
    level = _row_level(gamma, int(d))
    flat = spectrum[0] - spectrum[-1] <= 1e-12 * max(1.0, spectrum[0])
    return UniformOptimum(spectrum, float(level), bool(flat))


def tight_exists(alpha, d, n=None):
    """Whether an optimal design on a single dimension ``d`` is tight: ``d <= n`` and ``d alpha_1 <= sum alpha``."""
    alpha = _as_vector(alpha, "alpha")
    n = alpha.size if n is None else int(n)
    if d > n:
        return False
    total = float(alpha.sum())
    return bool(d * float(alpha.max()) <= total + 1e-12 * max(1.0, total))


@dataclass(frozen=True)
class ReducedSolution:
    """Result of :func:`optimize_reduced`.

    ``gap`` is the Frank-Wolfe duality gap at ``B``; it bounds the distance of
    ``objective`` to the minimum when ``phi`` is differentiable.  ``stalled``
    records that no pairwise step could decrease the objective any further.
    """

    weights: WeightMatrix
    delta: tuple
    psi: list
    objective: float
    gap: float
    iterations: int
    converged: bool
    stalled: bool = False
    levels: tuple = field(default=())

    @property
    def B(self):
        return self.weights.B


def _fw_gap(B, G, p, alpha):
    scaled = G / p[:, None]
    return float(np.sum(B * G) - np.dot(alpha, scaled.min(axis=0)))


def _column_gaps(B, G, p, alpha):
    scaled = G / p[:, None]
    return np.sum(B * G, axis=0) - alpha * scaled.min(axis=0)


class _PairwiseFW:
    """Mutable solver state for one run; rows of ``B`` are updated in place."""

    def __init__(self, B, p, alpha, delta, phi):
        self.B = B
        self.p = p
        self.alpha = alpha
        self.delta = delta
        self.phi = phi

    def scaled_row(self, i):
        # partial derivatives in the mass coordinates y_ij = p_i B_ij
        return _row_derivative(self.B[i], self.delta[i], self.phi)

    def scaled_gradient(self):
        return np.array([self.scaled_row(i) for i in range(len(self.delta))])

    def _slope(self, j, s, a, t):
        # derivative of the objective along "move t of mass from row a to row s in column j"
        bs, ba = self.B[s, j], self.B[a, j]
        self.B[s, j] = bs + t / self.p[s]
        self.B[a, j] = max(ba - t / self.p[a], 0.0)
        val = self.scaled_row(s)[j] - self.scaled_row(a)[j]
        self.B[s, j], self.B[a, j] = bs, ba
        return float(val)

    def step(self, j, s, a):
        """Exact line search; returns the mass moved (0 when no descent)."""
        tmax = self.p[a] * self.B[a, j]
        if tmax <= 0 or self._slope(j, s, a, 0.0) >= 0:
            return 0.0
        if self._slope(j, s, a, tmax) <= 0:
            t = tmax
        else:
            t = brentq(lambda u: self._slope(j, s, a, u), 0.0, tmax, xtol=1e-16, rtol=4 * np.finfo(float).eps)
        self.B[s, j] += t / self.p[s]
        self.B[a, j] = 0.0 if t >= tmax else self.B[a, j] - t / self.p[a]
        return t


def _start_point(alpha, p, seed):
    if seed is None:
        return np.tile(alpha / p.sum(), (p.size, 1))
    rng = np.random.default_rng(seed)
    mass = rng.dirichlet(np.ones(p.size), size=alpha.size).T * alpha
    return mass / p[:, None]


def optimize_reduced(alpha, p, delta, phi, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=None):
    """Minimize ``sum_i p_i tr phi(L_{delta_i}(B_i))`` over ``p^T B = alpha, B >= 0``.

    ``seed=None`` starts from the flat point ``B_ij = alpha_j / sum(p)``;
    an integer seed draws a random interior start.  Raises
    :class:`ConvergenceError` when the gap stays above ``tol`` for a
    differentiable ``phi``.  For non-smooth ``phi`` the gap of the chosen
    subgradient need not vanish; the run then ends once no pairwise step
    decreases the objective and the solution is returned with ``stalled`` set.
    """
    from .potentials import ConvexFn

    if not isinstance(phi, ConvexFn):
        raise ValidationError("phi must be a registered convex function")
    if not tol > 0:
        raise ValidationError("tol must be positive")
    alpha = _as_vector(alpha, "alpha")
    p = _as_vector(p, "p")
    delta = _check_delta(delta)
    if len(delta) != p.size:
        raise ValidationError("one weight per dimension is required")
    if np.any(p <= 0) or np.any(alpha < 0):
        raise ValidationError("p must be positive and alpha non-negative")

    if p.size == 1:
        B = (alpha / p[0])[None, :]
        return _solution(B, p, alpha, delta, phi, 0, True, False)

    solver = _PairwiseFW(_start_point(alpha, p, seed), p, alpha, delta, phi)
    it = 0
    stalled = False
    while True:
        g = solver.scaled_gradient()
        G = g * p[:, None]
        gap = _fw_gap(solver.B, G, p, alpha)
        if gap < tol:
            break
        if it >= max_iter:
            break
        it += 1
        col_gaps = _column_gaps(solver.B, G, p, alpha)
        moved = False
        for j in np.argsort(-col_gaps, kind="stable"):
            if col_gaps[j] <= 0:
                break
            s = int(np.argmin(g[:, j]))
            held = np.nonzero(solver.B[:, j] > 0)[0]
            a = int(held[np.argmax(g[held, j])])
            if a != s and solver.step(j, s, a) > 0:
                moved = True
                break
        if not moved:
            stalled = True
            break
    B = solver.B
    B *= np.where(p @ B > 0, alpha / np.where(p @ B > 0, p @ B, 1.0), 1.0)
    sol = _solution(B, p, alpha, delta, phi, it, None, stalled, tol)
    if not sol.converged and phi.differentiable:
        raise ConvergenceError(
            f"Frank-Wolfe did not converge: stopped after {it} iterations with gap {sol.gap:.3e} >= {tol:.1e}", result=sol)
    return sol


def _solution(B, p, alpha, delta, phi, it, converged, stalled, tol=DEFAULT_TOL):
    wm = WeightMatrix(B, p, alpha)
    gap = duality_gap(wm, delta, phi)
    psi = reduced_spectra(wm, delta)
    levels = tuple(_row_level(row, d) for row, d in zip(wm.B, delta))
    obj = float(sum(pi * np.sum(phi(s)) for pi, s in zip(p, psi)))
    if converged is None:
        converged = gap < tol or p.size == 1
    return ReducedSolution(wm, delta, psi, obj, gap, it, bool(converged), stalled, levels)


def brute_force_oracle(alpha, p, delta, phi, grid_step=0.01, max_points=MAX_GRID_POINTS):
    """Minimum of :func:`reduced_objective` over a grid of the feasible set.

    Rows ``1..m-1`` of each column range over multiples of ``grid_step`` (plus
    the endpoint) inside the scaled simplex; the last row takes the remaining
    mass.  Independent of the Frank-Wolfe code path.
    """
    alpha = _as_vector(alpha, "alpha")
    p = _as_vector(p, "p")
    delta = _check_delta(delta)
    if not grid_step > 0:
        raise ValidationError("grid_step must be positive")
    m, n = p.size, alpha.size
    if (m - 1) * n > 6:
        raise ValidationError("instance too large for exhaustive search")
    # the heaviest row takes the remaining mass: grid errors elsewhere shrink by p_i / p_last
    order = np.argsort(p, kind="stable")
    p, delta = p[order], tuple(delta[i] for i in order)
    axes = []
    for i, j in itertools.product(range(m - 1), range(n)):
        top = alpha[j] / p[i]
        axes.append(np.unique(np.append(np.arange(0.0, top, grid_step), top)))
    count = int(np.prod([a.size for a in axes])) if axes else 1
    if count > max_points:
        raise ValidationError(f"grid has {count} points, limit is {max_points}")
    if m == 1:
        rows = (alpha / p[0])[None, None, :]
    else:
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m - 1, n)
        used = np.einsum("i,kij->kj", p[: m - 1], mesh)
        last = (alpha[None, :] - used) / p[-1]
        ok = np.all(last >= -1e-12, axis=1)
        rows = np.concatenate([mesh[ok], np.maximum(last[ok], 0.0)[:, None, :]], axis=1)
    total = np.zeros(rows.shape[0])
    for i, d in enumerate(delta):
        total += p[i] * _batched_trace(rows[:, i, :], d, phi)
    return float(total.min())


def _batched_trace(gamma, d, phi):
    # tr phi(L_d(gamma)) for every row of gamma, vectorized
    g = -np.sort(-gamma, axis=1)
    k, n = g.shape
    if d > n:
        return np.sum(phi(g), axis=1)
    tail = np.concatenate([np.cumsum(g[:, ::-1], axis=1)[:, ::-1], np.zeros((k, 1))], axis=1)
    cand = tail[:, :d] / (d - np.arange(d))[None, :]
    valid = g[:, :d] <= cand
    first = np.where(valid.any(axis=1), valid.argmax(axis=1), d - 1)
    level = np.where(valid.any(axis=1), cand[np.arange(k), first], g[:, d - 1] + tail[:, d])
    vals = np.maximum(g[:, :d], level[:, None])
    return np.sum(phi(vals), axis=1)


@dataclass(frozen=True)
class OptimalDesign:
    """Output of :func:`assemble_optimal`.

    ``rows`` are the distinct fiber dimensions, ``row_weights`` the measure of
    each, ``row_of_cell[c]`` the row serving cell ``c`` and ``levels[c]`` its
    waterfill level.
    """

    frame: object
    solution: ReducedSolution
    rows: tuple
    row_weights: np.ndarray
    row_of_cell: tuple
    levels: tuple
    potential: float

    @property
    def tight(self):
        """Whether the frame operator is a multiple of the projection onto the subspace."""
        values = np.concatenate([self.solution.psi[r] for r in self.row_of_cell])
        return bool(values.max() - values.min() <= TIGHT_TOL * max(1.0, values.max()))


def assemble_optimal(alpha, spec, phi, tol=DEFAULT_TOL, seed=None, max_iter=DEFAULT_MAX_ITER, max_workers=1):
    """A frame for the subspace with global norms ``alpha`` minimizing the ``phi``-potential.

    Cells of equal dimension share a row of the reduced model; fibers on each
    cell get norms ``B_ij`` and spectrum ``psi_i``.
    """
    if not isinstance(spec, FsiSpec):
        raise ValidationError("spec must be an FsiSpec")
    alpha = _as_vector(alpha, "alpha")
    if np.any(alpha <= 0):
        raise ValidationError("norms must be positive")
    if len(spec) == 0:
        raise ValidationError("the subspace has empty spectrum")
    rows = tuple(sorted(set(spec.dims)))
    row_of_cell = tuple(rows.index(d) for d in spec.dims)
    row_weights = np.zeros(len(rows))
    for c, r in enumerate(row_of_cell):
        row_weights[r] += spec.weights[c]
    sol = optimize_reduced(alpha, row_weights, rows, phi, tol=tol, seed=seed, max_iter=max_iter)
    fs = FineStructure(
        tuple(sol.B[r] for r in row_of_cell),
        tuple(sol.psi[r] for r in row_of_cell),
    )
    frame = realize(fs, spec, max_workers)
    levels = tuple(sol.levels[r] for r in row_of_cell)
    return OptimalDesign(frame, sol, rows, row_weights, row_of_cell, levels, potential(frame, phi))


def compare_minimizers(alpha, p, delta, phis, tol=DEFAULT_TOL):
    """Reduced optima for several potentials and the largest pairwise spectral distance.

    An experiment aid for the question whether one design minimizes every
    convex potential at once; it makes no claim either way.
    """
    sols = {phi.spec(): optimize_reduced(alpha, p, delta, phi, tol=tol) for phi in phis}
    spread = 0.0
    for a, b in itertools.combinations(sols.values(), 2):
        for sa, sb in zip(a.psi, b.psi):
            spread = max(spread, float(np.max(np.abs(sa - sb))))
    return sols, spread


def design_report(design, phi):
    """Plain summary numbers of an :class:`OptimalDesign`."""
    fb = frame_bounds(design.frame)
    return {
        "potential": design.potential,
        "reduced_objective": design.solution.objective,
        "gap": design.solution.gap,
        "iterations": design.solution.iterations,
        "lower_bound": fb.lower,
        "upper_bound": fb.upper,
        "is_frame": fb.is_frame,
        "tight": design.tight,
        "phi": phi.spec(),
    }
