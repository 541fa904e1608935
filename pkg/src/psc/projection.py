"""The closest-point projection of V_k(R^N) onto the image of an embedding alpha."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linalg import RANK_TOL, batch_polar
from .stiefel import as_stack


@dataclass(frozen=True, eq=False)
class ProjectionOutcome:
    """Result of projecting one frame.

    ``y_hat`` is the low-dimensional coordinate in V_k(R^n) and ``projected = alpha @ y_hat``.
    Both are None for a point outside the domain; ``residual`` is then the distance from
    ``y`` to the image of alpha, which is still well defined.
    """

    y_hat: np.ndarray | None
    projected: np.ndarray | None
    residual: float
    in_domain: bool
    sigma_min: float


def _check_shapes(alpha: np.ndarray, ys: np.ndarray):
    if alpha.ndim != 2:
        raise ValueError(f"alpha must be a matrix, got shape {alpha.shape}")
    N, n = alpha.shape
    if ys.shape[1] != N:
        raise ValueError(f"frames have ambient dimension {ys.shape[1]}, alpha has {N}")
    if ys.shape[2] > n:
        raise ValueError(f"frame size k={ys.shape[2]} exceeds target dimension n={n}")


def _coordinates(alpha: np.ndarray, ys: np.ndarray):
    """Low-dim coordinates, singular values of alpha^T y and residuals for a stack of frames."""
    a = alpha.T @ ys
    y_hat, s = batch_polar(a)
    projected = alpha @ y_hat
    residuals = np.linalg.norm(ys - projected, axis=(1, 2))
    return y_hat, projected, residuals, s


def domain_check(alpha, y, tol: float = RANK_TOL) -> tuple[bool, float]:
    """Whether ``alpha^T y`` has full rank k, and its smallest singular value."""
    alpha = np.asarray(alpha, dtype=np.float64)
    ys = as_stack(y)
    _check_shapes(alpha, ys)
    s = np.linalg.svd(alpha.T @ ys[0], compute_uv=False)
    sigma_min = float(s[-1])
    return sigma_min > tol, sigma_min


def project(alpha, y, tol: float = RANK_TOL) -> ProjectionOutcome:
    alpha = np.asarray(alpha, dtype=np.float64)
    ys = as_stack(y)
    _check_shapes(alpha, ys)
    y_hat, projected, residuals, s = _coordinates(alpha, ys)
    sigma_min = float(s[0, -1])
    if sigma_min <= tol:
        raise DomainError(sigma_min)
    return ProjectionOutcome(y_hat[0], projected[0], float(residuals[0]), True, sigma_min)


@dataclass(eq=False)
class ProjectionBatch(Sequence):
    """Per-point projection results for a dataset, in input order.

    Array fields are stacked over points; rows of ``y_hat`` and ``projected`` for
    out-of-domain points are NaN.
    """

    y_hat: np.ndarray
    projected: np.ndarray
    residuals: np.ndarray
    in_domain: np.ndarray
    sigma_min: np.ndarray

    def __len__(self) -> int:
        return self.residuals.shape[0]

    def __getitem__(self, i) -> ProjectionOutcome:
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        ok = bool(self.in_domain[i])
        return ProjectionOutcome(
            self.y_hat[i] if ok else None,
            self.projected[i] if ok else None,
            float(self.residuals[i]),
            ok,
            float(self.sigma_min[i]),
        )

    @property
    def out_of_domain(self) -> np.ndarray:
        return np.flatnonzero(~self.in_domain)


def project_batch(alpha, data, tol: float = RANK_TOL) -> ProjectionBatch:
    alpha = np.asarray(alpha, dtype=np.float64)
    ys = as_stack(data)
    N, n = alpha.shape
    k = ys.shape[2] if ys.ndim == 3 else 1
    if ys.shape[0] == 0:
        return ProjectionBatch(
            np.zeros((0, n, k)), np.zeros((0, N, k)), np.zeros(0), np.zeros(0, bool), np.zeros(0)
        )
    _check_shapes(alpha, ys)
    y_hat, projected, residuals, s = _coordinates(alpha, ys)
    sigma_min = s[:, -1].copy()
    in_domain = sigma_min > tol
    y_hat[~in_domain] = np.nan
    projected[~in_domain] = np.nan
    return ProjectionBatch(y_hat, projected, residuals, in_domain, sigma_min)


def distance_to_image(alpha, data) -> np.ndarray:
    """Distance from each frame to the image of alpha, defined for every frame."""
    alpha = np.asarray(alpha, dtype=np.float64)
    ys = as_stack(data)
    _check_shapes(alpha, ys)
    return _coordinates(alpha, ys)[2]
