import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from framekit.errors import ConvergenceError, ValidationError
from framekit.frame_design import FsiSpec, frame_bounds, potential
from framekit.optimizer import (
    WeightMatrix,
    assemble_optimal,
    brute_force_oracle,
    compare_minimizers,
    design_report,
    duality_gap,
    optimize_reduced,
    reduced_gradient,
    reduced_objective,
    reduced_spectra,
    tight_exists,
    uniform_optimal,
)
from framekit.potentials import REGISTRY, exponential, piecewise_linear, power


def test_reduced_objective_example():
    wm = WeightMatrix([[1.0, 1.0, 1.0]], [1.0], [1.0, 1.0, 1.0])
    assert reduced_objective(wm, (2,), power(2)) == pytest.approx(4.5, abs=1e-14)
    assert np.allclose(reduced_spectra(wm, (2,))[0], [1.5, 1.5])


def test_reduced_objective_zero_row_and_zero_padding():
    wm = WeightMatrix([[0.0, 0.0], [2.0, 2.0]], [0.5, 0.5], [1.0, 1.0])
    psi = reduced_spectra(wm, (1, 3))
    assert np.array_equal(psi[0], [0.0]) and np.array_equal(psi[1], [2.0, 2.0, 0.0])
    assert reduced_objective(wm, (1, 3), power(2)) == pytest.approx(4.0)


def test_linear_potential_sees_only_totals(rng):
    lin = power(1)
    for _ in range(10):
        B = rng.uniform(0, 2, size=(2, 3))
        wm = WeightMatrix(B, [0.4, 0.6], [0.4, 0.6] @ B)
        assert reduced_objective(wm, (1, 2), lin) == pytest.approx(wm.alpha.sum())


def test_weight_matrix_validation():
    with pytest.raises(ValidationError):
        WeightMatrix([[1.0, -0.1]], [1.0], [1.0, -0.1])
    with pytest.raises(ValidationError):
        WeightMatrix([[1.0, 1.0]], [1.0], [1.0, 1.5])
    with pytest.raises(ValidationError):
        reduced_objective(WeightMatrix([[1.0]], [1.0], [1.0]), (2, 1), power(2))


def test_uniform_examples():
    u = uniform_optimal([1, 1, 1], 2)
    assert np.allclose(u.spectrum, [1.5, 1.5], atol=1e-10) and u.level == pytest.approx(1.5) and u.tight
    u = uniform_optimal([3, 1, 1], 2)
    assert np.allclose(u.spectrum, [3, 2], atol=1e-10) and u.level == pytest.approx(2, abs=1e-10)
    assert not u.tight
    u = uniform_optimal([1, 1], 3)
    assert np.array_equal(u.spectrum, [1, 1, 0]) and not u.tight


def test_tight_exists_examples():
    assert tight_exists([1, 1, 1], 2)
    assert not tight_exists([3, 1, 1], 2)
    assert not tight_exists([1, 1], 3)


def _bisect_level(gamma, d):
    # independent oracle: solve sum_{j<=r} max(gamma_j, c) = sum gamma by bisection
    g = np.sort(gamma)[::-1][: min(d, gamma.size)]
    lo, hi = 0.0, float(gamma.sum())
    for _ in range(200):
        mid = (lo + hi) / 2
        if np.maximum(g, mid).sum() > gamma.sum():
            hi = mid
        else:
            lo = mid
    return lo


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5), d=st.integers(1, 5))
def test_uniform_matches_bisection(seed, n, d):
    rng = np.random.default_rng(seed)
    alpha = np.sort(rng.uniform(0.1, 2, size=n))[::-1]
    p = rng.uniform(0.2, 1)
    u = uniform_optimal(alpha, d, p)
    r = min(n, d)
    c = _bisect_level(alpha / p, d)
    expected = np.concatenate([np.maximum(alpha[:r] / p, c), np.zeros(d - r)])
    assert np.allclose(u.spectrum, expected, atol=1e-10)
    if d < n:
        assert u.level == pytest.approx(c, abs=1e-9)


def test_tightness_dichotomy_exhaustive():
    for n, d in itertools.product(range(1, 5), range(1, 5)):
        for nums in itertools.combinations_with_replacement(range(1, 7), n):
            for den in (1, 2, 3, 6):
                alpha = np.array(sorted(nums, reverse=True), float) / den
                flat = uniform_optimal(alpha, d).tight
                assert flat == tight_exists(alpha, d), (alpha, d)


@given(seed=st.integers(0, 2**32 - 1), s=st.floats(0.1, 10))
def test_uniform_scaling(seed, s):
    rng = np.random.default_rng(seed)
    alpha = np.sort(rng.uniform(0.1, 2, size=int(rng.integers(1, 6))))[::-1]
    d, p = int(rng.integers(1, 6)), rng.uniform(0.2, 1)
    a = uniform_optimal(alpha, d, p)
    b = uniform_optimal(s * alpha, d, s * p)
    assert np.allclose(a.spectrum, b.spectrum, rtol=1e-12, atol=1e-12)
    # with p fixed the level is 1-homogeneous in alpha
    c = uniform_optimal(s * alpha, d, p)
    assert np.allclose(c.spectrum, s * a.spectrum, rtol=1e-12, atol=1e-12)
    assert c.level == pytest.approx(s * a.level, rel=1e-12, abs=1e-12)


def test_single_row_is_closed_form(rng):
    for _ in range(20):
        alpha = np.sort(rng.uniform(0.1, 2, size=int(rng.integers(1, 6))))[::-1]
        d, p = int(rng.integers(1, 6)), float(rng.uniform(0.2, 1))
        sol = optimize_reduced(alpha, [p], (d,), power(2))
        assert np.array_equal(sol.psi[0], uniform_optimal(alpha, d, p).spectrum)
        assert sol.converged


def test_two_cell_example_against_closed_form():
    # total mass 2 spread flat over C_W = 1.5 gives the tight level 4/3
    sol = optimize_reduced([1, 1], [0.5, 0.5], (1, 2), power(2))
    assert sol.objective == pytest.approx(8 / 3, abs=1e-8)
    for s in sol.psi:
        assert np.allclose(s, 4 / 3, atol=1e-7)
    assert sol.gap < 1e-8
    assert abs(sol.objective - brute_force_oracle([1, 1], [0.5, 0.5], (1, 2), power(2))) < 1e-4


def test_oracle_examples():
    # n = 1: 0.5 b^2 + 0.5 (2 - b)^2 is least at b = 1
    assert brute_force_oracle([1], [0.5, 0.5], (1, 2), power(2)) == pytest.approx(1.0)
    assert brute_force_oracle([1, 1, 1], [1.0], (2,), power(2)) == pytest.approx(4.5)
    with pytest.raises(ValidationError):
        brute_force_oracle([1] * 4, [0.2, 0.3, 0.4], (1, 2, 3), power(2))
    with pytest.raises(ValidationError):
        brute_force_oracle([1], [0.5, 0.5], (1, 2), power(2), grid_step=0)


def test_oracle_scan_is_midpoint_convex():
    f = lambda b: reduced_objective(WeightMatrix([[b], [2 - b]], [0.5, 0.5], [1.0]), (1, 2), exponential())
    xs = np.arange(0, 2.0001, 0.01)
    vals = np.array([f(x) for x in xs])
    assert np.all(vals[1:-1] <= (vals[:-2] + vals[2:]) / 2 + 1e-12)


def _small_instances():
    for m, n in itertools.product((1, 2), (1, 2)):
        for alpha in ([1.0, 0.5][:n], [0.7, 0.3][:n], [1.0, 1.0][:n]):
            for p in ([0.5, 0.5][:m], [0.2, 0.7][:m], [0.9, 0.1][:m]):
                for delta in ((1, 2), (1, 3), (2, 3))[: 3 if m == 2 else 1]:
                    yield np.array(alpha), np.array(p), delta[:m] if m == 2 else (delta[1],)


@pytest.mark.parametrize("phi", [power(2), exponential()], ids=["square", "exp"])
def test_optimizer_not_above_oracle(phi):
    for alpha, p, delta in _small_instances():
        sol = optimize_reduced(alpha, p, delta, phi)
        ref = brute_force_oracle(alpha, p, delta, phi)
        assert sol.gap < 1e-8
        # the grid is a subset of the feasible set; the gap bounds FW's excess
        assert sol.objective <= ref + sol.gap + 1e-12
        assert ref - sol.objective < 1e-4


def test_oracle_gap_closes_with_finer_grid():
    alpha, p, delta, phi = np.array([1.0, 1.0]), np.array([0.2, 0.2]), (1, 2), exponential()
    sol = optimize_reduced(alpha, p, delta, phi)
    coarse = brute_force_oracle(alpha, p, delta, phi, grid_step=0.01) - sol.objective
    fine = brute_force_oracle(alpha, p, delta, phi, grid_step=0.005) - sol.objective
    assert 0 <= fine < coarse
    assert fine < 1e-4


@given(seed=st.integers(0, 2**32 - 1))
def test_strict_positivity_for_square(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    delta = tuple(sorted(rng.choice(np.arange(1, 5), size=m, replace=False).tolist()))
    n = int(rng.integers(delta[-1], 7))
    alpha = np.sort(rng.uniform(0.05, 1, size=n))[::-1]
    p = rng.dirichlet(np.ones(m)) * 0.99
    sol = optimize_reduced(alpha, p, delta, power(2))
    for s in sol.psi:
        assert np.all(s > 1e-8)


def _numeric_gradient(wm, delta, phi, h=1e-6):
    out = np.zeros(wm.shape)
    for i, j in itertools.product(*map(range, wm.shape)):
        e = np.zeros(wm.shape)
        e[i, j] = h
        # objective extended off the feasible set, rows evaluated directly
        up = sum(pi * np.sum(phi(s)) for pi, s in zip(wm.p, _spectra(wm.B + e, delta)))
        dn = sum(pi * np.sum(phi(s)) for pi, s in zip(wm.p, _spectra(wm.B - e, delta)))
        out[i, j] = (up - dn) / (2 * h)
    return out


def _spectra(B, delta):
    from framekit.waterfilling import discrete_waterfill

    return [discrete_waterfill(row, d) for row, d in zip(B, delta)]


@given(seed=st.integers(0, 2**32 - 1), name=st.sampled_from(["square", "cube", "power1.5", "exp"]))
def test_gradient_matches_finite_differences(seed, name):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 4)), int(rng.integers(1, 6))
    delta = tuple(sorted(rng.choice(np.arange(1, 6), size=m, replace=False).tolist()))
    B = rng.uniform(0.1, 2, size=(m, n))
    p = rng.uniform(0.1, 0.5, size=m)
    wm = WeightMatrix(B, p, p @ B)
    # ties at the water level are kinks; keep away from them
    from framekit.waterfilling import discrete_waterfill_full

    for row, d in zip(B, delta):
        if d <= n:
            c = discrete_waterfill_full(row, d).level
            if np.min(np.abs(row - c)) < 1e-4:
                return
    phi = REGISTRY[name]
    assert np.allclose(reduced_gradient(wm, delta, phi), _numeric_gradient(wm, delta, phi), atol=1e-4, rtol=1e-6)


def test_duality_gap_vanishes_at_optimum_only():
    sol = optimize_reduced([1, 1], [0.5, 0.5], (1, 2), power(2))
    assert duality_gap(sol.weights, (1, 2), power(2)) < 1e-8
    wm = WeightMatrix([[2.0, 2.0], [0.0, 0.0]], [0.5, 0.5], [1.0, 1.0])
    assert duality_gap(wm, (1, 2), power(2)) > 0.1


def test_seeded_starts_agree_and_repeat():
    args = ([0.9, 0.6, 0.3], [0.3, 0.3, 0.3], (1, 2, 3), exponential())
    a = optimize_reduced(*args, seed=7)
    b = optimize_reduced(*args, seed=7)
    c = optimize_reduced(*args)
    assert np.array_equal(a.B, b.B)
    assert a.objective == pytest.approx(c.objective, abs=1e-8)


def test_optimizer_errors():
    with pytest.raises(ValidationError):
        optimize_reduced([1, 1], [0.5, 0.5], (1, 2), lambda x: x**2)
    with pytest.raises(ValidationError):
        optimize_reduced([1, 1], [0.5, 0.5], (1, 2), power(2), tol=0)
    with pytest.raises(ValidationError):
        optimize_reduced([1, 1], [0.5, 0.5], (2, 1), power(2))
    with pytest.raises(ConvergenceError) as exc:
        optimize_reduced([1, 0.5, 0.2], [0.3, 0.3, 0.3], (1, 2, 3), exponential(), max_iter=1)
    assert exc.value.result is not None


def test_nonsmooth_potential_returns_without_raising():
    sol = optimize_reduced([1, 0.5], [0.5, 0.5], (1, 2), piecewise_linear([0.5, 1.0]))
    assert sol.converged or sol.stalled
    ref = brute_force_oracle([1, 0.5], [0.5, 0.5], (1, 2), piecewise_linear([0.5, 1.0]))
    assert sol.objective <= ref + 1e-3


def test_assemble_single_cell_tight():
    spec = FsiSpec.from_cells([1.0], [2])
    design = assemble_optimal([1, 1, 1], spec, power(2))
    assert design.tight and design.potential == pytest.approx(4.5, abs=1e-9)
    assert np.allclose(design.frame.global_norms(), 1, atol=1e-9)
    fb = frame_bounds(design.frame)
    assert fb.lower == pytest.approx(1.5) and fb.upper == pytest.approx(1.5)


def test_assemble_two_cells_matches_oracle():
    spec = FsiSpec.from_cells([0.5, 0.5], [1, 2])
    design = assemble_optimal([1, 1], spec, power(2))
    assert np.allclose(design.frame.global_norms(), [1, 1], atol=1e-9)
    ref = brute_force_oracle([1, 1], [0.5, 0.5], (1, 2), power(2))
    assert abs(design.potential - ref) < 1e-4
    assert design.potential == pytest.approx(design.solution.objective, abs=1e-9)
    assert design.tight


def test_assemble_merges_equal_dims(rng):
    spec = FsiSpec.from_cells([0.2, 0.3, 0.4], [2, 1, 2], labels=["a", "b", "c"])
    design = assemble_optimal([1.0, 0.6, 0.2], spec, exponential())
    assert design.rows == (1, 2) and np.allclose(design.row_weights, [0.3, 0.6])
    assert design.row_of_cell == (1, 0, 1)
    assert np.allclose(design.frame.global_norms(), [1.0, 0.6, 0.2], atol=1e-9)
    assert design.potential == pytest.approx(design.solution.objective, abs=1e-9)
    assert frame_bounds(design.frame).is_frame
    rep = design_report(design, exponential())
    assert rep["gap"] < 1e-8 and rep["is_frame"]


def test_assemble_rejects_bad_input():
    spec = FsiSpec.from_cells([1.0], [2])
    with pytest.raises(ValidationError):
        assemble_optimal([1, 0], spec, power(2))
    with pytest.raises(ValidationError):
        assemble_optimal([1, 1], "cells", power(2))


def test_assemble_parallel_realization_identical():
    spec = FsiSpec.from_cells([0.1, 0.2, 0.3, 0.3], [1, 2, 3, 3])
    a = assemble_optimal([1.0, 0.8, 0.5, 0.4], spec, power(2))
    b = assemble_optimal([1.0, 0.8, 0.5, 0.4], spec, power(2), max_workers=4)
    for x, y in zip(a.frame.fibers, b.frame.fibers):
        assert np.array_equal(x, y)


def test_compare_minimizers_runs():
    sols, spread = compare_minimizers([1, 0.5], [0.5, 0.5], (1, 2), [power(2), exponential(), power(1.5)])
    assert set(sols) == {"power:2", "exp", "power:1.5"}
    assert spread >= 0 and all(s.gap < 1e-8 for s in sols.values())


def test_potential_of_assembled_design_matches_reduced(rng):
    from conftest import random_spec

    for _ in range(5):
        spec = random_spec(rng)
        n = max(spec.max_dim, int(rng.integers(1, 6)))
        alpha = np.sort(rng.uniform(0.1, 1, size=n))[::-1]
        design = assemble_optimal(alpha, spec, power(2))
        assert potential(design.frame, power(2)) == pytest.approx(design.solution.objective, abs=1e-9)
        assert frame_bounds(design.frame).is_frame


def test_near_optimal_designs_approach_optimal_spectra():
    # the excess potential controls the spectral distance at a square-root rate
    from conftest import random_feasible
    from framekit.frame_design import FineStructure, extract_fine_structure

    rng = np.random.default_rng(4)
    spec = FsiSpec.from_cells([0.3, 0.3, 0.3], [1, 2, 3])
    alpha = [1.0, 0.7, 0.5, 0.2]
    design = assemble_optimal(alpha, spec, power(2), tol=1e-12)
    opt = extract_fine_structure(design.frame)
    for _ in range(50):
        norms, spectra = random_feasible(rng, spec, alpha)
        t = 10.0 ** -rng.uniform(1, 7)
        fs = FineStructure(
            tuple(t * a + (1 - t) * b for a, b in zip(norms, opt.norms)),
            tuple(t * a + (1 - t) * b for a, b in zip(spectra, opt.spectra)),
        )
        excess = potential(fs, power(2), spec) - design.potential
        dist = max(np.max(np.abs(x - y)) for x, y in zip(fs.spectra, opt.spectra))
        assert excess >= -1e-12
        # strong convexity of x^2 gives excess >= sum_i p_i |dpsi_i|^2 >= min(p) dist^2
        assert dist <= np.sqrt(max(excess, 0) / 0.3) + 1e-6
