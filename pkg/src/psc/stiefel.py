"""Points, datasets and metric quantities on the Stiefel manifold V_t(R^s)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMeanError, NotOrthonormalError, RankDeficiencyError
from .linalg import RANK_TOL, as_matrix, gaussian_matrix, polar_decompose

ORTHO_TOL = 1e-8
TANGENT_TOL = 1e-8
MAX_REDRAWS = 8


def orthonormality_defect(a) -> float:
    a = np.asarray(a, dtype=np.float64)
    return float(np.linalg.norm(a.T @ a - np.eye(a.shape[1])))


@dataclass(frozen=True, eq=False)
class StiefelPoint:
    """An s x t matrix with orthonormal columns.

    Construction rejects input whose defect ``||A^T A - I||_F`` exceeds ``ORTHO_TOL``;
    use `StiefelPoint.renormalize` for input that has drifted slightly.
    """

    data: np.ndarray
    defect: float = field(init=False)

    def __post_init__(self):
        a = as_matrix(self.data)
        if a.shape[0] < a.shape[1]:
            raise ValueError(f"Stiefel point needs rows >= cols, got shape {a.shape}")
        defect = orthonormality_defect(a)
        if defect > ORTHO_TOL:
            raise NotOrthonormalError(defect, ORTHO_TOL)
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "data", a)
        object.__setattr__(self, "defect", defect)

    @classmethod
    def renormalize(cls, a) -> "StiefelPoint":
        return cls(polar_decompose(a).u)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


def _stack_defects(points: np.ndarray) -> np.ndarray:
    k = points.shape[-1]
    gram = np.swapaxes(points, -1, -2) @ points
    return np.linalg.norm(gram - np.eye(k), axis=(-2, -1))


@dataclass(eq=False)
class FrameDataset:
    """An ordered collection of N x k orthonormal frames, stored as an (m, N, k) array."""

    points: np.ndarray
    labels: np.ndarray | None = None
    source: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 2:
            pts = pts[:, :, None]
        if pts.ndim != 3:
            raise ValueError(f"points must have shape (m, N, k), got {pts.shape}")
        m, N, k = pts.shape
        if not (N >= k >= 1):
            raise ValueError(f"frames must satisfy N >= k >= 1, got N={N}, k={k}")
        if m:
            if not np.all(np.isfinite(pts)):
                raise ValueError("dataset has non-finite entries")
            defects = _stack_defects(pts)
            bad = np.flatnonzero(defects > ORTHO_TOL)
            if bad.size:
                raise NotOrthonormalError(defects[bad[0]], ORTHO_TOL)
        self.points = pts
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (m,):
                raise ValueError(f"expected {m} labels, got shape {labels.shape}")
            self.labels = labels

    @classmethod
    def from_frames(cls, frames, labels=None, source="", renormalize=False) -> "FrameDataset":
        frames = [np.asarray(f, dtype=np.float64) for f in frames]
        if renormalize:
            frames = [polar_decompose(f).u for f in frames]
        return cls(np.stack(frames), labels=labels, source=source)

    @classmethod
    def empty(cls, N: int, k: int, source: str = "") -> "FrameDataset":
        return cls(np.zeros((0, N, k)), source=source)

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    @property
    def frame_size(self) -> int:
        return self.points.shape[2]

    def __len__(self) -> int:
        return self.points.shape[0]

    def __getitem__(self, i) -> np.ndarray:
        return self.points[i]

    def __iter__(self):
        return iter(self.points)

    def subset(self, indices) -> "FrameDataset":
        idx = np.asarray(indices, dtype=np.int64)
        labels = None if self.labels is None else self.labels[idx]
        return FrameDataset(self.points[idx], labels=labels, source=self.source)


def as_stack(data) -> np.ndarray:
    """Coerce a FrameDataset or array-like of frames to an (m, N, k) float array."""
    if isinstance(data, FrameDataset):
        return data.points
    pts = np.asarray(data, dtype=np.float64)
    if pts.ndim == 2:
        pts = pts[None]
    return pts


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=np.float64)
        d = np.asarray(self.direction, dtype=np.float64)
        if d.shape != base.shape:
            raise ValueError(f"direction shape {d.shape} != base shape {base.shape}")
        m = base.T @ d
        if np.linalg.norm(m + m.T) > TANGENT_TOL * max(1.0, np.linalg.norm(d)):
            raise ValueError("direction is not tangent: base^T direction is not skew-symmetric")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "direction", d)

    def norm(self) -> float:
        return float(np.linalg.norm(self.direction))


def frobenius_distance(p, q) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    return float(np.linalg.norm(p - q))


def nuclear_norm(a) -> float:
    return float(np.sum(np.linalg.svd(as_matrix(a), compute_uv=False)))


def uniform_stiefel(s: int, t: int, seed: int) -> np.ndarray:
    """Haar-distributed point of V_t(R^s): the polar factor of a Gaussian matrix."""
    if s < t:
        raise ValueError(f"need s >= t, got s={s}, t={t}")
    for attempt in range(MAX_REDRAWS):
        g = gaussian_matrix(s, t, seed, attempt) if attempt else gaussian_matrix(s, t, seed)
        try:
            return polar_decompose(g).u
        except RankDeficiencyError as exc:
            last = exc
    raise last


def skew(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m - m.T)


def tangent_project(base, z) -> TangentVector:
    """Orthogonal projection of ``z`` onto the tangent space at ``base`` (embedded metric)."""
    base = np.asarray(base, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z.shape != base.shape:
        raise ValueError(f"shape mismatch: {z.shape} vs {base.shape}")
    btz = base.T @ z
    direction = base @ skew(btz) + (z - base @ btz)
    return TangentVector(base, direction)


def retract(base, step, tol: float = RANK_TOL) -> np.ndarray:
    """Polar retraction: the orthonormal polar factor of ``base + step``."""
    base = np.asarray(base, dtype=np.float64)
    step = np.asarray(step, dtype=np.float64)
    if step.shape != base.shape:
        raise ValueError(f"shape mismatch: {step.shape} vs {base.shape}")
    return polar_decompose(base + step, tol=tol).u


def frechet_mean(points, tol: float = RANK_TOL) -> np.ndarray:
    """Minimiser of the summed squared chordal distance: the polar factor of sum(y).

    Raises DegenerateMeanError when the sum is rank deficient, i.e. the mean is not unique.
    """
    pts = as_stack(points)
    if pts.shape[0] == 0:
        raise ValueError("Frechet mean of an empty set")
    total = np.zeros(pts.shape[1:])
    for y in pts:  # fixed-order sum for reproducibility
        total += y
    try:
        return polar_decompose(total, tol=tol).u
    except RankDeficiencyError as exc:
        raise DegenerateMeanError(exc.sigma_min) from None


def frechet_variance(points, tol: float = RANK_TOL) -> float:
    pts = as_stack(points)
    mu = frechet_mean(pts, tol=tol)
    return float(np.mean(np.sum((pts - mu) ** 2, axis=(1, 2))))
