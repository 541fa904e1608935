import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psc.errors import RankDeficiencyError
from psc.linalg import (
    batch_polar,
    batch_singular_values,
    det_rank_is_full,
    gaussian_matrix,
    polar_decompose,
    rank_is_full,
    rng,
    svd_thin,
)

from helpers import seeds


@pytest.mark.parametrize(
    "a, expected",
    [(np.eye(2), [1, 1]), (np.diag([3.0, 0.0]), [3, 0]), (np.array([[0.0, 1], [1, 0]]), [1, 1])],
)
def test_svd_small_cases(a, expected):
    assert np.allclose(svd_thin(a).singular_values, expected, atol=1e-14)


@given(seeds, st.integers(1, 9), st.integers(1, 9))
def test_svd_reconstructs_and_sorts(seed, r, c):
    a = np.random.default_rng(seed).standard_normal((r, c))
    f = svd_thin(a)
    s = f.singular_values
    assert np.linalg.norm(f.reconstruct() - a) <= 1e-10 * max(1.0, s[0])
    assert np.all(s >= 0) and np.all(np.diff(s) <= 0)


def test_svd_rejects_nonfinite():
    with pytest.raises(ValueError):
        svd_thin(np.array([[np.nan, 1.0]]))


def test_polar_small_cases():
    f = polar_decompose(np.diag([2.0, 3.0]))
    assert np.allclose(f.u, np.eye(2)) and np.allclose(f.h, np.diag([2.0, 3.0]))
    c, s = np.cos(0.7), np.sin(0.7)
    rot = np.array([[c, -s], [s, c]])
    f = polar_decompose(rot)
    assert np.allclose(f.u, rot) and np.allclose(f.h, np.eye(2))
    f = polar_decompose(np.array([[0.0], [2.0]]))
    assert np.allclose(f.u, [[0], [1]]) and np.allclose(f.h, [[2]])


@given(seeds, st.integers(1, 8), st.integers(0, 4))
def test_polar_properties(seed, k, extra):
    gen = np.random.default_rng(seed)
    a = gen.standard_normal((k + extra, k))
    f = polar_decompose(a)
    assert np.linalg.norm(f.u @ f.h - a) <= 1e-10 * max(1.0, np.linalg.norm(a))
    assert np.linalg.norm(f.h - f.h.T) <= 1e-12
    assert np.linalg.eigvalsh(f.h).min() >= -1e-12
    # same factor from an independently computed SVD
    p, _, qt = np.linalg.svd(a, full_matrices=False)
    assert np.allclose(f.u, p @ qt, atol=1e-10)


def test_polar_rank_deficient():
    with pytest.raises(RankDeficiencyError) as exc:
        polar_decompose(np.zeros((3, 2)))
    assert exc.value.sigma_min == 0


def test_rank_checks():
    assert rank_is_full(np.zeros((2, 1))) == (False, 0.0)
    assert rank_is_full(np.eye(3)) == (True, 1.0)
    gen = np.random.default_rng(0)
    for _ in range(50):
        a = gen.standard_normal((6, 3))
        full_by_count = np.sum(np.linalg.svd(a, compute_uv=False) > 1e-10) == 3
        assert rank_is_full(a)[0] == full_by_count
        assert det_rank_is_full(a) == full_by_count
        a[:, 2] = 0.0
        assert not rank_is_full(a)[0] and not det_rank_is_full(a)


def test_rank_checks_random_shapes():
    gen = np.random.default_rng(1)
    for _ in range(1000):
        c = gen.integers(1, 11)
        r = gen.integers(c, 21)
        a = gen.standard_normal((r, c))
        if gen.random() < 0.3:
            a[:, -1] = 0.0
        oracle = np.sum(np.linalg.svd(a, compute_uv=False) > 1e-10) == c
        assert rank_is_full(a)[0] == oracle


def test_gaussian_matrix_determinism():
    assert np.array_equal(gaussian_matrix(2, 2, 7), gaussian_matrix(2, 2, 7))
    assert not np.array_equal(gaussian_matrix(3, 2, 0), gaussian_matrix(3, 2, 1))
    g = gaussian_matrix(1000, 1, 1)
    assert abs(g.mean()) < 0.1 and abs(g.var() - 1) < 0.1


def test_rng_keys_give_independent_streams():
    a = rng(5, 0).standard_normal(4)
    b = rng(5, 1).standard_normal(4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, rng(5, 0).standard_normal(4))


@given(seeds, st.integers(1, 4), st.integers(0, 3), st.integers(1, 5))
def test_batch_polar_matches_single(seed, k, extra, m):
    gen = np.random.default_rng(seed)
    a = gen.standard_normal((m, k + extra, k))
    u, s = batch_polar(a)
    for i in range(m):
        assert np.allclose(u[i], polar_decompose(a[i]).u, atol=1e-10)
        assert np.allclose(s[i], np.linalg.svd(a[i], compute_uv=False), atol=1e-12)
    assert np.allclose(batch_singular_values(a), s, atol=1e-12)
