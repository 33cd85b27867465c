import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from framekit.frame_design import FsiSpec
from framekit.waterfilling import discrete_waterfill

settings.register_profile(
    "framekit", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("framekit")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, d, complex_=True):
    a = rng.normal(size=(d, d))
    if complex_:
        a = a + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def unistochastic(rng, size):
    u = np.linalg.qr(rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)))[0]
    return np.abs(u) ** 2


def random_pair(rng, d, n=None):
    """``(b, c)`` with ``c`` (length n) majorized by ``b`` (length d).

    ``c`` is a doubly stochastic image of ``b`` padded to ``max(d, n)``; for
    ``n < d`` only the top ``n`` entries of ``b`` may be non-zero.
    """
    n = d if n is None else n
    b = np.sort(rng.uniform(0, 3, size=d))[::-1]
    if rng.random() < 0.2:
        b[rng.integers(d)] = b[0]  # ties
    b = np.sort(b)[::-1]
    if n < d:
        b[n:] = 0.0
        return b, unistochastic(rng, n).T @ b[:n]
    full = np.concatenate([b, np.zeros(n - d)])
    return b, unistochastic(rng, n).T @ full


def random_spec(rng, max_cells=4, max_dim=4, total=0.99):
    cells = int(rng.integers(1, max_cells + 1))
    dims = rng.integers(1, max_dim + 1, size=cells)
    weights = rng.dirichlet(np.ones(cells)) * total
    return FsiSpec.from_cells(weights, dims)


def random_admissible(rng, spec, n):
    """Per-cell norms and spectra satisfying both admissibility conditions."""
    norms, spectra = [], []
    for d in spec.dims:
        a = rng.uniform(0, 2, size=n)
        if rng.random() < 0.3:
            a[rng.integers(n)] = 0.0
        spectra.append(_majorant(rng, a, d))
        norms.append(a)
    return norms, spectra


def _majorant(rng, a, d):
    # a spectrum of length d majorizing the norms a
    lam = discrete_waterfill(a, d)
    r = min(d, a.size)
    if r > 1 and rng.random() < 0.7:
        t = rng.uniform(0, 1)
        peaked = np.zeros(d)
        peaked[:r] = np.sort(a)[::-1][:r]
        peaked[0] += a.sum() - peaked[:r].sum()
        lam = np.sort(t * lam + (1 - t) * peaked)[::-1]
    return lam


def random_feasible(rng, spec, alpha):
    """Norms and spectra of a random design whose global norms are ``alpha``."""
    alpha = np.asarray(alpha, float)
    w = np.asarray(spec.weights)
    split = rng.dirichlet(np.full(len(w), rng.choice([0.3, 1.0, 5.0])), size=alpha.size).T
    # scaled to the full measure so that sum_c w_c a_c = alpha
    norms = [alpha * split[c] / w[c] for c in range(len(w))]
    spectra = [_majorant(rng, a, d) for a, d in zip(norms, spec.dims)]
    return norms, spectra
