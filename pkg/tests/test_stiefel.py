import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psc.errors import DegenerateMeanError, NotOrthonormalError
from psc.stiefel import (
    FrameDataset,
    StiefelPoint,
    TangentVector,
    frechet_mean,
    frechet_variance,
    frobenius_distance,
    nuclear_norm,
    retract,
    tangent_project,
    uniform_stiefel,
)

from helpers import complement, orthogonal, orthonormal, seeds


def test_stiefel_point_admission():
    p = StiefelPoint(np.eye(3)[:, :2])
    assert p.shape == (3, 2) and p.defect == 0.0
    with pytest.raises(NotOrthonormalError):
        StiefelPoint(np.ones((3, 2)))
    with pytest.raises(ValueError):
        StiefelPoint(np.eye(3)[:2])
    drifted = np.eye(3)[:, :2] * (1 + 1e-6)
    with pytest.raises(NotOrthonormalError):
        StiefelPoint(drifted)
    assert StiefelPoint.renormalize(drifted).defect < 1e-14


def test_stiefel_point_is_immutable():
    p = StiefelPoint(np.eye(2))
    with pytest.raises(ValueError):
        p.data[0, 0] = 5.0


def test_frame_dataset_validation():
    ds = FrameDataset(np.stack([np.eye(3)[:, :1], np.eye(3)[:, 1:2]]), labels=[0, 1])
    assert len(ds) == 2 and ds.ambient_dim == 3 and ds.frame_size == 1
    assert ds.subset([1]).labels.tolist() == [1]
    with pytest.raises(ValueError):
        FrameDataset(np.stack([np.eye(3)[:, :1]]), labels=[0, 1])
    with pytest.raises(NotOrthonormalError):
        FrameDataset(np.ones((2, 3, 1)))
    assert len(FrameDataset.empty(4, 2)) == 0


def test_distances():
    e1, e2 = np.eye(2)[:, :1], np.eye(2)[:, 1:]
    assert frobenius_distance(e1, e1) == 0
    assert np.isclose(frobenius_distance(e1, e2), np.sqrt(2))
    gen = np.random.default_rng(0)
    alpha = orthonormal(gen, 8, 3)
    y = complement(alpha)[:, :3]
    x = orthonormal(gen, 3, 3)
    assert abs(frobenius_distance(y, alpha @ x) - np.sqrt(6)) <= 1e-10


@given(seeds)
def test_triangle_inequality(seed):
    gen = np.random.default_rng(seed)
    p, q, r = (orthonormal(gen, 5, 2) for _ in range(3))
    assert frobenius_distance(p, r) <= frobenius_distance(p, q) + frobenius_distance(q, r) + 1e-12


def test_nuclear_norm():
    assert np.isclose(nuclear_norm(np.diag([1.0, 2.0])), 3)
    gen = np.random.default_rng(0)
    assert np.isclose(nuclear_norm(orthonormal(gen, 6, 3)), 3)
    a = gen.standard_normal((4, 2))
    w = np.linalg.eigvalsh(a.T @ a)
    assert np.isclose(nuclear_norm(a), np.sum(np.sqrt(w)), atol=1e-12)


def test_uniform_stiefel():
    p = uniform_stiefel(5, 2, seed=3)
    StiefelPoint(p)
    assert np.array_equal(p, uniform_stiefel(5, 2, seed=3))
    draws = np.stack([uniform_stiefel(3, 1, seed=s)[:, 0] for s in range(20000)])
    second = draws.T @ draws / len(draws)
    assert np.abs(second - np.eye(3) / 3).max() < 0.02


@given(seeds, st.integers(1, 4), st.integers(0, 4))
def test_tangent_projection(seed, k, extra):
    gen = np.random.default_rng(seed)
    base = orthonormal(gen, k + extra, k)
    z = gen.standard_normal(base.shape)
    xi = tangent_project(base, z)
    again = tangent_project(base, xi.direction)
    assert np.linalg.norm(again.direction - xi.direction) <= 1e-10
    assert np.linalg.norm(tangent_project(base, base).direction) <= 1e-12
    m = base.T @ xi.direction
    assert np.linalg.norm(m + m.T) <= 1e-10


def test_tangent_projection_of_symmetric_gradient():
    gen = np.random.default_rng(1)
    base = orthonormal(gen, 6, 3)
    g = gen.standard_normal((6, 3))
    g -= base @ (base.T @ g)
    g += base @ (lambda s: s + s.T)(gen.standard_normal((3, 3)))  # base^T g symmetric
    xi = tangent_project(base, g)
    expected = g - base @ (base.T @ g)
    assert np.allclose(xi.direction, expected, atol=1e-12)


def test_tangent_vector_rejects_normal_direction():
    base = np.eye(3)[:, :2]
    with pytest.raises(ValueError):
        TangentVector(base, base)


def test_retraction():
    gen = np.random.default_rng(2)
    base = orthonormal(gen, 7, 3)
    assert np.allclose(retract(base, np.zeros_like(base)), base)
    xi = tangent_project(base, gen.standard_normal(base.shape)).direction
    xi /= np.linalg.norm(xi)
    errs = [np.linalg.norm(retract(base, t * xi) - (base + t * xi)) for t in (1e-2, 1e-3)]
    assert 80 < errs[0] / errs[1] < 120
    StiefelPoint(retract(base, 5 * xi))


def test_frechet_mean_cases():
    e1, e2 = np.eye(2)[:, :1], np.eye(2)[:, 1:]
    y = np.array([[0.6], [0.8]])
    assert np.allclose(frechet_mean([y, y, y]), y)
    with pytest.raises(DegenerateMeanError):
        frechet_mean([e1, -e1])
    assert np.allclose(frechet_mean([e1, e2]), np.array([[1], [1]]) / np.sqrt(2))
    assert frechet_variance([y, y]) <= 1e-24
    assert np.isclose(frechet_variance([e1, e2]), 2 - np.sqrt(2))


def test_frechet_mean_brute_force():
    theta = np.linspace(0, 2 * np.pi, 10**6, endpoint=False)
    circle = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    gen = np.random.default_rng(3)
    for _ in range(10):
        angles = gen.normal(gen.uniform(0, 2 * np.pi), 0.8, size=20)
        pts = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        # sum_i |c - p_i|^2 = 2m - 2 c . sum_i p_i
        scores = -circle @ pts.sum(axis=0)
        best = theta[np.argmin(scores)]
        mu = frechet_mean(pts[:, :, None])[:, 0]
        diff = np.angle(np.exp(1j * (np.arctan2(mu[1], mu[0]) - best)))
        assert abs(diff) <= 1e-3


@given(seeds)
def test_frechet_mean_left_isometry(seed):
    gen = np.random.default_rng(seed)
    pts = np.stack([orthonormal(gen, 4, 2) for _ in range(6)])
    g = orthogonal(gen, 4)
    mu = frechet_mean(pts)
    assert np.allclose(frechet_mean(g @ pts), g @ mu, atol=1e-8)
    assert np.isclose(frechet_variance(g @ pts), frechet_variance(pts), atol=1e-12)
