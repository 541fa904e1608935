import numpy as np
import pytest

from psc.datagen import (
    BundleConfig,
    NoisyEmbedConfig,
    StimulusConfig,
    generate_noisy_embedded,
    generate_stimulus_walk,
    mobius_frames,
    mobius_lift,
    mobius_transition,
    nearest_chart,
    preprocess_responses,
    reflect_into,
    tent_partition,
    torus_frames,
    torus_whitney_lift,
)
from psc.errors import DegenerateStepError
from psc.projection import project_batch


def test_noisy_embed_noiseless_on_image():
    g = generate_noisy_embedded(NoisyEmbedConfig(7, 4, 2, 30, 0.0, 1))
    assert project_batch(g.alpha, g.dataset).residuals.max() <= 1e-12
    assert np.allclose(g.dataset.points, g.alpha @ g.x)


def test_noisy_embed_circle_parameters():
    g = generate_noisy_embedded(NoisyEmbedConfig(3, 2, 1, 100, 0.5, 42))
    assert len(g.dataset) == 100
    assert project_batch(g.alpha, g.dataset).residuals.max() <= 2 * 0.5


def test_noisy_embed_is_deterministic():
    a = generate_noisy_embedded(NoisyEmbedConfig(5, 3, 2, 20, 0.3, 9))
    b = generate_noisy_embedded(NoisyEmbedConfig(5, 3, 2, 20, 0.3, 9))
    assert np.array_equal(a.dataset.points, b.dataset.points)
    c = generate_noisy_embedded(NoisyEmbedConfig(5, 3, 2, 20, 0.3, 10))
    assert not np.array_equal(a.dataset.points, c.dataset.points)


def test_noisy_embed_perturbation_norm():
    # before renormalisation ||alpha x + eps u|| lies in [1 - eps, 1 + eps] for k = 1
    gen = np.random.default_rng(0)
    for _ in range(100):
        v = gen.standard_normal(3)
        v /= np.linalg.norm(v)
        u = gen.standard_normal(3)
        u /= np.linalg.norm(u)
        assert 0.5 <= np.linalg.norm(v + 0.5 * u) <= 1.5


def test_noisy_embed_validation():
    with pytest.raises(ValueError):
        NoisyEmbedConfig(3, 4, 1, 10)
    with pytest.raises(ValueError):
        NoisyEmbedConfig(3, 2, 1, 10, epsilon=-0.1)


def test_reflection():
    x = reflect_into(np.array([-0.1, 0.5, np.pi + 0.2, 3 * np.pi - 0.1]), 0.0, np.pi)
    assert np.allclose(x, [0.1, 0.5, np.pi - 0.2, np.pi - 0.1])


def test_stimulus_walk():
    responses, walk = generate_stimulus_walk(StimulusConfig(walk_length=2000, seed=3))
    assert responses.shape == (2000, 100)
    assert walk.min() >= 0 and walk.max() <= np.pi
    assert np.all((responses >= 0) & (responses <= 1))
    assert np.abs(np.diff(walk)).max() < 0.1


def test_stimulus_at_neuron_gives_full_response():
    config = StimulusConfig(neuron_count=5, walk_length=1, stimulus_interval=(0.0, np.pi), seed=0)
    responses, walk = generate_stimulus_walk(config)
    centers = np.linspace(0, np.pi, 5)
    slopes = np.maximum(1 - responses[0], 0) / np.maximum(np.abs(walk[0] - centers), 1e-300)
    active = responses[0] > 0
    assert np.all((slopes[active] >= 25 - 1e-9) & (slopes[active] <= 50 + 1e-9))
    assert np.all(np.abs(walk[0] - centers[~active]) >= 1 / 50 - 1e-12)


def test_preprocess():
    responses, _ = generate_stimulus_walk(StimulusConfig(walk_length=500, seed=1))
    for centering in ("population", "temporal"):
        ds = preprocess_responses(responses, centering=centering)
        assert np.abs(np.linalg.norm(ds.points[:, :, 0], axis=1) - 1).max() <= 1e-12
    centered = responses - responses.mean(axis=0)
    assert np.abs(centered.mean(axis=0)).max() <= 1e-12
    with pytest.raises(DegenerateStepError):
        preprocess_responses(np.ones((4, 10)))
    with pytest.raises(DegenerateStepError) as exc:
        preprocess_responses(np.ones((4, 10)), centering="temporal")
    assert exc.value.index == 0


def test_tent_partition():
    b = np.linspace(0, 1, 1001)
    phi = tent_partition(b, 25)
    assert np.allclose(phi.sum(axis=1), 1)
    # support of phi_j is exactly ((j-1)/J, (j+1)/J) mod 1
    j = 7
    inside = (np.mod(b - (j - 1) / 25, 1.0) > 1e-12) & (np.mod(b - (j - 1) / 25, 1.0) < 2 / 25 - 1e-12)
    assert np.all(phi[inside, j - 1] > 0) and np.all(phi[~inside, j - 1] <= 1e-12)


def test_mobius_transition_is_a_cocycle():
    J = 25
    for j in range(1, J + 1):
        assert mobius_transition(j, j, J) == 1
        for l in range(1, J + 1):
            assert mobius_transition(j, l, J) == mobius_transition(l, j, J)
    # going once around the circle multiplies to -1: the bundle is nontrivial
    loop = np.prod([mobius_transition(j, j % J + 1, J) for j in range(1, J + 1)])
    assert loop == -1


def test_mobius_lift_unit_norm_and_chart_change():
    data, b = mobius_lift(BundleConfig(25, 2000, seed=0))
    assert np.abs(np.linalg.norm(data.points[:, :, 0], axis=1) - 1).max() <= 1e-12
    # inside the overlap of two charts the lifts differ only by a sign
    for x in np.linspace(0.001, 0.999, 200):
        c = nearest_chart(x, 25)[0]
        other = c % 25 + 1 if np.mod(x - c / 25, 1.0) < 0.5 else (c - 2) % 25 + 1
        f = mobius_frames(x, 25, [c])[0]
        g = mobius_frames(x, 25, [other])[0]
        assert np.allclose(f, g) or np.allclose(f, -g)


def test_mobius_projector_continuity_and_injectivity():
    gen = np.random.default_rng(0)
    b = gen.uniform(0, 1, 10**4)
    f = mobius_frames(b, 25)
    g = mobius_frames(np.mod(b + 1e-6, 1.0), 25)
    pf = f[:, :, None] * f[:, None, :]
    pg = g[:, :, None] * g[:, None, :]
    change = np.linalg.norm(pf - pg, axis=(1, 2))
    # square roots of tents are only Hoelder-1/2 where a tent vanishes: |dP| <= 2 sqrt(2 J db)
    assert change.max() <= 2 * np.sqrt(2 * 25 * 1e-6)
    assert np.median(change) <= 1e-3
    b = np.linspace(0, 1, 1000, endpoint=False)
    f = mobius_frames(b, 25)
    # ||f f^T - g g^T||_F^2 = 2 - 2 (f . g)^2 for unit vectors
    d = np.sqrt(np.maximum(2 - 2 * (f @ f.T) ** 2, 0))
    circ = np.abs(b[:, None] - b[None])
    circ = np.minimum(circ, 1 - circ)
    assert d[circ >= 0.01].min() >= 1e-4


def test_torus_lift():
    data, truth = torus_whitney_lift(BundleConfig(10, 500, seed=1))
    assert data.points.shape == (500, 200, 2) and truth.shape == (500, 2)
    data, t = torus_whitney_lift(BundleConfig(10, 300, mode="pq_curve", p=1, q=1, seed=2))
    assert t.shape == (300,) and t.min() >= 0 and t.max() < 1
    # on the diagonal both factors see the same base point, so the two columns
    # carry the same weights sqrt(phi_j phi_l) in their own slots
    f = np.abs(data.points.reshape(300, 10, 10, 2, 2))
    assert np.allclose(f[..., 0, 0], f[..., 1, 1])
    assert np.all(f[..., 1, 0] == 0) and np.all(f[..., 0, 1] == 0)


def test_torus_second_moment_isotropic():
    gen = np.random.default_rng(0)
    b = gen.uniform(0, 1, size=(20000, 2))
    f = torus_frames(b[:, 0], b[:, 1], 10)
    pair = np.stack([f[:, 0, 0], f[:, 1, 1]], axis=1)  # the first chart's coordinate pair
    m = pair.T @ pair / len(pair)
    scale = np.trace(m)
    # swapping the two circle factors exchanges the pair, so the diagonal is balanced;
    # the off-diagonal term is not zero because both entries share sqrt(phi_1 phi_1)
    assert abs(m[0, 0] - m[1, 1]) <= 0.05 * scale


def test_bundle_config_validation():
    with pytest.raises(ValueError):
        BundleConfig(chart_count=2)
    with pytest.raises(ValueError):
        BundleConfig(mode="pq_curve", p=0, q=1)
    with pytest.raises(ValueError):
        BundleConfig(mode="spiral")
