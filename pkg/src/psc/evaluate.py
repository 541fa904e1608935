"""Evaluation metrics: reconstruction error, variance ratio, spectra, loss landscapes,
circular-coordinate recovery and clustering on the Stiefel manifold."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .errors import EmptySurvivorsError
from .fit import cost, second_moment
from .linalg import rng
from .pipeline import FitReport
from .stiefel import as_stack, frechet_variance


def projection_mse(report: FitReport) -> float:
    """Mean squared residual over the surviving points."""
    r = report.outcomes.residuals
    if r.size == 0:
        raise EmptySurvivorsError("report has no surviving points")
    return float(np.mean(r**2))


def variance_ratio(report: FitReport, data) -> float:
    """Frechet variance of the projected survivors over that of the original survivors.

    Both sets live in V_k(R^N); the value equals the ratio computed from the
    low-dimensional coordinates because alpha is an isometry.
    """
    ys = as_stack(data)[report.surviving]
    if ys.shape[0] == 0:
        raise EmptySurvivorsError("report has no surviving points")
    return frechet_variance(report.outcomes.projected) / frechet_variance(ys)


def spectrum(data) -> np.ndarray:
    """Eigenvalues of the second-moment matrix mean(y y^T), largest first. They sum to k."""
    ys = as_stack(data)
    if ys.shape[0] == 0:
        raise ValueError("spectrum of an empty dataset")
    return np.linalg.eigvalsh(second_moment(ys))[::-1]


# ---------------------------------------------------------------------------
# loss landscape for N = 3, n = 2, k = 1


def plane_normal(alpha) -> np.ndarray:
    """Unit normal of the plane spanned by a 3 x 2 alpha, flipped into the upper hemisphere."""
    alpha = np.asarray(alpha, dtype=np.float64)
    v = np.cross(alpha[:, 0], alpha[:, 1])
    v /= np.linalg.norm(v)
    return -v if v[2] < 0 else v


def normal_angles(v) -> tuple[float, float]:
    """(azimuth in [0, 2 pi), inclination in [0, pi/2]) of an upper-hemisphere unit vector."""
    v = np.asarray(v, dtype=np.float64)
    v = -v if v[2] < 0 else v
    theta = float(np.mod(np.arctan2(v[1], v[0]), 2 * np.pi))
    phi = float(np.arccos(np.clip(v[2], -1.0, 1.0)))
    return theta, phi


def unit_normal(theta, phi) -> np.ndarray:
    return np.array([np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)])


def plane_basis(v) -> np.ndarray:
    """An orthonormal 3 x 2 basis of the plane orthogonal to v."""
    _, _, vt = np.linalg.svd(np.asarray(v, dtype=np.float64)[None, :])
    return vt[1:].T


@dataclass(eq=False)
class LandscapeGrid:
    theta: np.ndarray  # (n_theta,)
    phi: np.ndarray  # (n_phi,)
    cost: np.ndarray  # (n_theta, n_phi)
    markers: dict[str, tuple[float, float]] = field(default_factory=dict)

    @property
    def resolution(self) -> tuple[int, int]:
        return self.cost.shape

    @property
    def spacing(self) -> float:
        return max(np.ptp(self.theta) / (self.theta.size - 1), np.ptp(self.phi) / (self.phi.size - 1))

    def argmax(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.cost), self.cost.shape)
        return float(self.theta[i]), float(self.phi[j])

    def cell_distance(self, a: tuple[float, float], b: tuple[float, float]) -> float:
        """Angle between the two normal lines, in units of the grid spacing."""
        c = abs(float(unit_normal(*a) @ unit_normal(*b)))
        return float(np.arccos(min(c, 1.0))) / self.spacing

    def rows(self):
        """(theta, phi, cost) triples, theta-major."""
        for i, t in enumerate(self.theta):
            for j, p in enumerate(self.phi):
                yield float(t), float(p), float(self.cost[i, j])


def landscape(data, resolution=(73, 19), markers: dict | None = None) -> LandscapeGrid:
    """Cost over every plane in R^3, parametrised by the spherical angles of its normal.

    ``markers`` maps names to 3 x 2 embeddings whose normals are recorded on the grid.
    """
    ys = as_stack(data)
    if ys.shape[1:] != (3, 1):
        raise ValueError(f"landscape needs frames in V_1(R^3), got {ys.shape[1:]}")
    n_theta, n_phi = resolution
    if n_theta < 2 or n_phi < 2:
        raise ValueError("resolution must be at least 2 in each direction")
    theta = np.linspace(0.0, 2 * np.pi, n_theta)
    phi = np.linspace(0.0, np.pi / 2, n_phi)
    grid = np.empty((n_theta, n_phi))
    for i, t in enumerate(theta):
        for j, p in enumerate(phi):
            grid[i, j] = cost(plane_basis(unit_normal(t, p)), ys)
    marks = {name: normal_angles(plane_normal(a)) for name, a in (markers or {}).items()}
    return LandscapeGrid(theta, phi, grid, marks)


# ---------------------------------------------------------------------------
# circular coordinates


@dataclass(eq=False)
class PathRecovery:
    raw: np.ndarray  # atan2 angles in (-pi, pi]
    grassmann: np.ndarray  # raw mod pi, in [0, pi)
    aligned: np.ndarray
    smoothed: np.ndarray
    smoothed_truth: np.ndarray
    scale: float
    offset: float
    orientation: int
    mse: float


def circle_angles(points) -> np.ndarray:
    ys = as_stack(points)
    if ys.shape[1:] != (2, 1):
        raise ValueError(f"expected frames in V_1(R^2), got {ys.shape[1:]}")
    raw = np.arctan2(ys[:, 1, 0], ys[:, 0, 0])
    return np.where(raw == -np.pi, np.pi, raw)


def recover_path(low_dim, truth, smoothing_sigma: float = 100.0) -> PathRecovery:
    """Align recovered circle coordinates to a ground-truth angle sequence and score them.

    The recovered angles are unwrapped, oriented, shifted so the first sample matches the
    truth, and scaled by least squares; both sequences are then Gaussian smoothed and
    compared by mean squared error.
    """
    raw = circle_angles(low_dim)
    truth = np.asarray(truth, dtype=np.float64)
    if truth.shape != raw.shape:
        raise ValueError(f"length mismatch: {raw.size} recovered vs {truth.size} true angles")
    grassmann = np.mod(raw, np.pi)
    target = np.unwrap(truth)
    e = target - target[0]

    best = None
    for orientation in (1, -1):
        u = np.unwrap(orientation * raw)
        d = u - u[0]
        denom = float(d @ d)
        scale = max(float(d @ e) / denom, 0.0) if denom > 0 else 1.0
        aligned = scale * d + target[0]
        err = float(np.mean((aligned - target) ** 2))
        if best is None or err < best[0]:
            offset = float(target[0] - scale * u[0])
            best = (err, orientation, scale, offset, aligned)
    _, orientation, scale, offset, aligned = best

    if smoothing_sigma > 0:
        smoothed = gaussian_filter1d(aligned, smoothing_sigma)
        smoothed_truth = gaussian_filter1d(target, smoothing_sigma)
    else:
        smoothed, smoothed_truth = aligned.copy(), target.copy()
    mse = float(np.mean((smoothed - smoothed_truth) ** 2))
    return PathRecovery(raw, grassmann, aligned, smoothed, smoothed_truth, scale, offset, orientation, mse)


# ---------------------------------------------------------------------------
# clustering


@dataclass(eq=False)
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    history: list[float]
    repairs: int


def _centroid(members: np.ndarray) -> tuple[np.ndarray, bool]:
    """Closed-form chordal mean. A rank-deficient member sum still has the SVD maximiser
    U V^T of tr(c^T S); it is used and flagged."""
    total = members.sum(axis=0)
    u, s, vt = np.linalg.svd(total, full_matrices=False)
    degenerate = s[-1] <= 1e-10 * max(1.0, s[0])
    return u @ vt, bool(degenerate)


def _assign(ys: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = ys.shape[2]
    inner = np.einsum("mij,cij->mc", ys, centroids)
    d2 = np.maximum(2 * k - 2 * inner, 0.0)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(ys.shape[0]), labels]


def _lloyd(ys: np.ndarray, centroids: np.ndarray, max_iters: int) -> KMeansResult:
    c = centroids.copy()
    history = []
    repairs = 0
    labels = None
    for _ in range(max_iters):
        new_labels, d2 = _assign(ys, c)
        history.append(float(d2.sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(c.shape[0]):
            members = ys[labels == j]
            if members.shape[0] == 0:
                far = int(np.argmax(d2))
                c[j] = ys[far]
                labels[far] = j
                d2[far] = 0.0
                repairs += 1
                continue
            c[j], degenerate = _centroid(members)
            repairs += degenerate
    labels, d2 = _assign(ys, c)
    return KMeansResult(labels, c, float(d2.sum()), history, repairs)


def kmeans_stiefel(
    points, cluster_count: int, seed: int = 0, restarts: int = 10, max_iters: int = 100
) -> KMeansResult:
    """Lloyd's algorithm under the Frobenius distance with closed-form chordal means.

    Keeps the restart with the lowest within-cluster sum of squares.
    """
    ys = as_stack(points)
    m = ys.shape[0]
    if not 1 <= cluster_count <= m:
        raise ValueError(f"cluster_count must lie in [1, {m}], got {cluster_count}")
    best = None
    for r in range(restarts):
        start = np.sort(rng(seed, r).choice(m, size=cluster_count, replace=False))
        result = _lloyd(ys, ys[start], max_iters)
        if best is None or result.inertia < best.inertia:
            best = result
    return best


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-corrected agreement between two partitions, computed from the contingency table."""
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max(initial=-1) + 1, ib.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)

    def pairs(x):
        x = np.asarray(x, dtype=np.float64)
        return float(np.sum(x * (x - 1) / 2))

    index = pairs(table)
    sum_a = pairs(table.sum(axis=1))
    sum_b = pairs(table.sum(axis=0))
    total = pairs([a.size])
    expected = sum_a * sum_b / total if total else 0.0
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        same = np.array_equal(table.astype(bool).sum(axis=1), np.ones(table.shape[0], dtype=int)) and (
            table.shape[0] == table.shape[1]
        )
        return 1.0 if same else 0.0
    return float((index - expected) / (max_index - expected))
