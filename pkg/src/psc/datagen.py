"""Seeded generators for the synthetic experiments.

* noisy frames near a linearly embedded V_k(R^n),
* a tent-tuned neural population responding to a random walk on a half circle,
* frame-valued lifts of the Moebius bundle over the circle and of its Whitney
  square over the torus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStepError, RankDeficiencyError
from .linalg import batch_singular_values, polar_decompose, rng
from .stiefel import MAX_REDRAWS, FrameDataset, uniform_stiefel

# sub-stream keys, so adding draws to one stream never shifts another
_ALPHA, _X, _NOISE, _REDRAW, _SLOPES, _WALK, _BASE = range(7)


@dataclass
class NoisyEmbedConfig:
    N: int
    n: int
    k: int
    count: int
    epsilon: float = 0.0
    seed: int = 0
    alpha: np.ndarray | None = None

    def __post_init__(self):
        if not 1 <= self.k <= self.n <= self.N:
            raise ValueError(f"need 1 <= k <= n <= N, got k={self.k}, n={self.n}, N={self.N}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.count < 0:
            raise ValueError("count must be nonnegative")
        if self.alpha is not None and np.shape(self.alpha) != (self.N, self.n):
            raise ValueError(f"alpha must have shape ({self.N}, {self.n})")


@dataclass
class NoisyEmbedded:
    dataset: FrameDataset
    alpha: np.ndarray
    x: np.ndarray


def _uniform_frames(gen: np.random.Generator, count: int, s: int, t: int) -> np.ndarray:
    g = gen.standard_normal((count, s, t))
    p, _, qt = np.linalg.svd(g, full_matrices=False)
    return p @ qt


def generate_noisy_embedded(config: NoisyEmbedConfig) -> NoisyEmbedded:
    """Frames ``y = polar(alpha x + eps U)`` with x uniform on V_k(R^n), U a random unit-norm matrix."""
    c = config
    alpha = uniform_stiefel(c.N, c.n, c.seed) if c.alpha is None else np.asarray(c.alpha, float)
    x = _uniform_frames(rng(c.seed, _X), c.count, c.n, c.k)
    clean = alpha @ x
    if c.epsilon == 0:
        return NoisyEmbedded(FrameDataset(clean, source=f"noisy-embed eps=0 seed={c.seed}"), alpha, x)
    noise = rng(c.seed, _NOISE).standard_normal((c.count, c.N, c.k))
    noise /= np.linalg.norm(noise, axis=(1, 2))[:, None, None]
    ys = np.empty_like(clean)
    for i in range(c.count):
        u = noise[i]
        for attempt in range(MAX_REDRAWS + 1):
            try:
                ys[i] = polar_decompose(clean[i] + c.epsilon * u).u
                break
            except RankDeficiencyError:
                if attempt == MAX_REDRAWS:
                    raise
                u = rng(c.seed, _REDRAW, i, attempt).standard_normal((c.N, c.k))
                u /= np.linalg.norm(u)
    source = f"noisy-embed eps={c.epsilon!r} seed={c.seed}"
    return NoisyEmbedded(FrameDataset(ys, source=source), alpha, x)


@dataclass
class StimulusConfig:
    neuron_count: int = 100
    slope_range: tuple[float, float] = (25.0, 50.0)
    walk_length: int = 13000
    walk_step_std: float = 0.01
    stimulus_interval: tuple[float, float] = (0.0, np.pi)
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.slope_range
        if not 0 < lo <= hi:
            raise ValueError("slope_range must be positive and ordered")
        if self.walk_length < 1 or self.neuron_count < 1:
            raise ValueError("walk_length and neuron_count must be >= 1")
        a, b = self.stimulus_interval
        if not a < b:
            raise ValueError("stimulus_interval must be ordered")


def reflect_into(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Fold values into [lo, hi] by mirror reflection at both ends."""
    width = hi - lo
    t = np.mod(values - lo, 2 * width)
    return lo + np.where(t > width, 2 * width - t, t)


def tent_response(distance: np.ndarray, slope) -> np.ndarray:
    return np.maximum(1.0 - slope * distance, 0.0)


def generate_stimulus_walk(config: StimulusConfig) -> tuple[np.ndarray, np.ndarray]:
    """Population responses (walk_length x neuron_count) and the stimulus angles.

    Neurons sit at evenly spaced preferred angles; neuron i responds with
    ``max(1 - m_i |n_i - s|, 0)`` where the slope m_i is uniform in ``slope_range``.
    """
    c = config
    lo, hi = c.stimulus_interval
    centers = np.linspace(lo, hi, c.neuron_count)
    slopes = rng(c.seed, _SLOPES).uniform(*c.slope_range, size=c.neuron_count)
    gen = rng(c.seed, _WALK)
    start = gen.uniform(lo, hi)
    steps = gen.normal(0.0, c.walk_step_std, size=c.walk_length - 1)
    walk = np.empty(c.walk_length)
    walk[0] = start
    s = start
    for t, d in enumerate(steps, start=1):
        s = float(reflect_into(np.array(s + d), lo, hi))
        walk[t] = s
    dist = np.abs(walk[:, None] - centers[None, :])
    return tent_response(dist, slopes[None, :]), walk


def preprocess_responses(responses, centering: str = "population", source: str = "stimulus") -> FrameDataset:
    """Center the responses, then scale every time step to unit norm.

    ``population`` subtracts the population's mean response at each time step;
    ``temporal`` subtracts each neuron's mean over time.
    """
    r = np.asarray(responses, dtype=np.float64)
    if centering == "population":
        centered = r - r.mean(axis=1, keepdims=True)
    elif centering == "temporal":
        centered = r - r.mean(axis=0, keepdims=True)
    else:
        raise ValueError(f"unknown centering {centering!r}")
    norms = np.linalg.norm(centered, axis=1)
    scale = max(1.0, float(np.max(np.abs(r)))) if r.size else 1.0
    bad = np.flatnonzero(norms <= 1e-12 * scale)
    if bad.size:
        raise DegenerateStepError(bad[0])
    return FrameDataset((centered / norms[:, None])[:, :, None], source=source)


# ---------------------------------------------------------------------------
# vector bundle lifts


def circle_distance(a, b) -> np.ndarray:
    d = np.mod(np.asarray(a) - np.asarray(b), 1.0)
    return np.minimum(d, 1.0 - d)


def tent_partition(b, J: int) -> np.ndarray:
    """Partition of unity on R/Z subordinate to U_j = ((j-1)/J, (j+1)/J), j = 1..J.

    Column j-1 holds ``phi_j(b)``; each tent has support exactly U_j.
    """
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    centers = np.arange(1, J + 1) / J
    raw = np.maximum(0.0, 1.0 - J * circle_distance(b[:, None], centers[None, :]))
    return raw / raw.sum(axis=1, keepdims=True)


def nearest_chart(b, J: int) -> np.ndarray:
    """1-based chart whose centre j/J is nearest to b (ties go to the lower index)."""
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    centers = np.arange(1, J + 1) / J
    return np.argmin(circle_distance(b[:, None], centers[None, :]), axis=1) + 1


def mobius_transition(j, l, J: int) -> np.ndarray:
    """O(1) cocycle of the Moebius bundle on the cyclic cover.

    Adjacent charts glue with +1 except across the seam between chart J and chart 1,
    which glues with -1; a chart glues to itself with +1. Non-adjacent pairs get 0.
    """
    j = np.asarray(j)
    l = np.asarray(l)
    diff = np.mod(j - l, J)
    adjacent = (diff == 1) | (diff == J - 1)
    seam = adjacent & (np.minimum(j, l) == 1) & (np.maximum(j, l) == J)
    return np.where(j == l, 1.0, np.where(seam, -1.0, np.where(adjacent, 1.0, 0.0)))


def mobius_frames(b, J: int, charts=None) -> np.ndarray:
    """Local lifts ``f_l(b) = [sqrt(phi_j(b)) Omega_{jl}]_j`` as an (m, J) array."""
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    charts = nearest_chart(b, J) if charts is None else np.atleast_1d(charts)
    phi = tent_partition(b, J)
    js = np.arange(1, J + 1)
    omega = mobius_transition(js[None, :], charts[:, None], J)
    return np.sqrt(phi) * omega


@dataclass
class BundleConfig:
    chart_count: int = 25
    sample_count: int = 1000
    mode: str = "uniform"  # uniform | pq_curve
    p: int = 1
    q: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.chart_count < 3:
            raise ValueError("chart_count must be >= 3")
        if self.mode not in ("uniform", "pq_curve"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.mode == "pq_curve" and (self.p == 0 or self.q == 0):
            raise ValueError("p and q must be nonzero integers")


def mobius_lift(config: BundleConfig) -> tuple[FrameDataset, np.ndarray]:
    """Uniform samples b on R/Z and their lifts in V_1(R^J)."""
    J = config.chart_count
    b = rng(config.seed, _BASE).uniform(0.0, 1.0, size=config.sample_count)
    frames = mobius_frames(b, J)[:, :, None]
    return FrameDataset(frames, source=f"mobius J={J} seed={config.seed}"), b


def torus_frames(b1, b2, J: int) -> np.ndarray:
    """Lifts of the Whitney sum of the two pulled-back Moebius bundles, shape (m, 2 J^2, 2).

    The cover is the product cover, the partition of unity is phi_j(b1) phi_l(b2), and the
    transition functions are diag(Omega_jl(b1), Omega_km(b2)).
    """
    f1 = mobius_frames(b1, J)  # sqrt(phi_j(b1)) Omega
    f2 = mobius_frames(b2, J)
    m = f1.shape[0]
    out = np.zeros((m, J, J, 2, 2))
    out[:, :, :, 0, 0] = f1[:, :, None] * np.sqrt(tent_partition(b2, J))[:, None, :]
    out[:, :, :, 1, 1] = np.sqrt(tent_partition(b1, J))[:, :, None] * f2[:, None, :]
    return out.reshape(m, 2 * J * J, 2)


def torus_whitney_lift(config: BundleConfig) -> tuple[FrameDataset, np.ndarray]:
    """Samples on T^2 (uniform, or along a (p, q)-curve) lifted to V_2(R^{2 J^2}).

    The returned truth is the (m, 2) array of base points for uniform sampling, or the
    curve parameter t in [0, 1) for a (p, q)-curve.
    """
    c = config
    J = c.chart_count
    gen = rng(c.seed, _BASE)
    if c.mode == "uniform":
        b = gen.uniform(0.0, 1.0, size=(c.sample_count, 2))
        truth = b
    else:
        t = gen.uniform(0.0, 1.0, size=c.sample_count)
        b = np.mod(np.column_stack([c.p * t, c.q * t]), 1.0)
        truth = t
    frames = torus_frames(b[:, 0], b[:, 1], J)
    label = "uniform" if c.mode == "uniform" else f"({c.p},{c.q})-curve"
    return FrameDataset(frames, source=f"torus {label} J={J} seed={c.seed}"), truth


def min_singular_values(frames: np.ndarray) -> np.ndarray:
    return batch_singular_values(frames)[:, -1]
