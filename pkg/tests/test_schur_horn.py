import numpy as np
import pytest
from hypothesis import given, strategies as st

from framekit.errors import MajorizationError, ValidationError
from framekit.measure import vector_majorize
from framekit.schur_horn import (
    dft_matrix,
    field_schur_horn,
    schur_horn_unitary,
    synthesis_vectors,
    two_by_two_block,
)

from conftest import random_pair


def diag_of(u, b):
    return np.diag(u.conj().T @ np.diag(b) @ u).real


def synth(vectors, c):
    return (vectors * c) @ vectors.conj().T


def test_two_by_two_half_split():
    u = two_by_two_block(3, 1, 2)
    assert np.allclose(u * np.sqrt(2), [[1, -1], [1, 1]], atol=1e-15)
    assert np.allclose(diag_of(u, [3, 1]), [2, 2], atol=1e-15)


def test_two_by_two_identity_when_nothing_to_mix():
    assert np.allclose(two_by_two_block(3, 1, 3), np.eye(2))
    assert np.array_equal(two_by_two_block(2, 2, 2), np.eye(2))


def test_two_by_two_unequal_split():
    u = two_by_two_block(3, 1, 2.5)
    m = u.T @ np.diag([3.0, 1.0]) @ u
    assert np.allclose(np.diag(m), [2.5, 1.5], atol=1e-14)
    assert abs(m[0, 1]) > 0.1
    assert np.allclose(u.T @ u, np.eye(2), atol=1e-15)


def test_two_by_two_rejects_non_majorized():
    with pytest.raises(MajorizationError):
        two_by_two_block(3, 1, 3.5)


def test_equal_inputs_give_identity():
    assert np.allclose(np.abs(schur_horn_unitary([3, 2, 1], [3, 2, 1])), np.eye(3))


def test_flat_target_uses_dft():
    u = schur_horn_unitary([2, 1, 0], [1, 1, 1])
    assert np.allclose(u, dft_matrix(3), atol=1e-15)
    assert np.allclose(diag_of(u, [2, 1, 0]), 1, atol=1e-14)


def test_rejects_non_majorized():
    with pytest.raises(MajorizationError):
        schur_horn_unitary([2, 1], [3, 0])
    with pytest.raises(ValidationError):
        schur_horn_unitary([2, 1], [1, 1, 1])


def test_unsorted_inputs():
    b, c = [1.0, 4.0, 2.0], [2.0, 3.0, 2.0]
    u = schur_horn_unitary(b, c)
    assert np.allclose(diag_of(u, b), c, atol=1e-12)


def test_synthesis_examples():
    s = synthesis_vectors([2], [1, 1])
    assert np.allclose(np.abs(s.vectors), 1)
    s = synthesis_vectors([3, 1], [2, 2])
    assert np.allclose(synth(s.vectors, [2, 2]), np.diag([3, 1]), atol=1e-14)
    assert np.allclose(np.linalg.norm(s.vectors, axis=0), 1)
    s = synthesis_vectors([1, 1], [1, 1])
    assert np.allclose(np.abs(s.vectors), np.eye(2))


def test_synthesis_flags_zero_weights():
    s = synthesis_vectors([2, 0], [2, 0])
    assert list(s.zero_weight) == [False, True]
    assert np.allclose(np.linalg.norm(s.vectors, axis=0), 1)


def test_synthesis_rank_deficient_diagonal():
    # n < d requires b to vanish beyond n
    s = synthesis_vectors([2, 1, 0], [1.5, 1.5])
    assert np.allclose(synth(s.vectors, [1.5, 1.5]), np.diag([2, 1, 0]), atol=1e-14)
    with pytest.raises(MajorizationError):
        synthesis_vectors([1, 1, 1], [1.5, 1.5])


@given(d=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_random_unitaries(d, seed):
    rng = np.random.default_rng(seed)
    b, c = random_pair(rng, d)
    b, c = rng.permutation(b), rng.permutation(c)
    u = schur_horn_unitary(b, c)
    assert np.max(np.abs(u.conj().T @ u - np.eye(d))) <= 1e-10
    got = diag_of(u, b)
    assert np.max(np.abs(got - c)) <= 1e-9
    assert vector_majorize(got, b, tol=1e-10)


@given(d=st.integers(1, 8), n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_random_synthesis(d, n, seed):
    rng = np.random.default_rng(seed)
    b, c = random_pair(rng, d, n)
    b, c = rng.permutation(b), rng.permutation(c)
    s = synthesis_vectors(b, c)
    assert np.allclose(np.linalg.norm(s.vectors, axis=0), 1, atol=1e-12)
    assert np.max(np.abs(synth(s.vectors, c) - np.diag(b))) <= 1e-9
    eigs = np.linalg.eigvalsh(synth(s.vectors, c))[::-1]
    assert np.allclose(eigs, np.sort(b)[::-1], atol=1e-9)


def test_field_single_cell_matches_pointwise():
    b, c = [3.0, 1.0], [2.0, 2.0]
    assert np.allclose(field_schur_horn([b], [c])[0], schur_horn_unitary(b, c))


def test_field_independent_cells_and_threads(rng):
    bs, cs = [], []
    for _ in range(100):
        d = int(rng.integers(1, 9))
        b, c = random_pair(rng, d, int(rng.integers(1, 9)))
        bs.append(b)
        cs.append(c)
    seq = field_schur_horn(bs, cs, mode="vectors")
    par = field_schur_horn(bs, cs, mode="vectors", max_workers=4)
    for s1, s2, b, c in zip(seq, par, bs, cs):
        assert np.array_equal(s1.vectors, s2.vectors)
        assert np.max(np.abs(synth(s1.vectors, c) - np.diag(b))) <= 1e-9


def test_field_reports_failing_cell():
    with pytest.raises(MajorizationError, match="'bad'"):
        field_schur_horn([[1, 1], [2, 0]], [[1, 1], [3, -1]], labels=["ok", "bad"])
