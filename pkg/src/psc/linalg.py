"""Dense small-matrix primitives: SVD, polar decomposition, rank tests, seeded sampling.

SVD is delegated to LAPACK through numpy. Everything here is a pure function of
its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure, RankDeficiencyError

RANK_TOL = 1e-10


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``a = u @ diag(singular_values) @ v.T`` with r = min(rows, cols)."""

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.singular_values) @ self.v.T


@dataclass(frozen=True)
class PolarFactors:
    u: np.ndarray
    h: np.ndarray


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def svd_thin(a) -> SvdFactors:
    a = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(a.shape) from exc
    return SvdFactors(u, s, vt.T)


def polar_decompose(a, tol: float = RANK_TOL) -> PolarFactors:
    """Polar decomposition ``a = u @ h`` of a full-column-rank tall matrix.

    ``u = P Q^T`` and ``h = Q diag(sigma) Q^T`` for the thin SVD ``a = P diag(sigma) Q^T``;
    the result does not depend on which SVD LAPACK returns.
    """
    a = as_matrix(a)
    if a.shape[0] < a.shape[1]:
        raise ValueError(f"polar decomposition needs rows >= cols, got shape {a.shape}")
    f = svd_thin(a)
    if f.singular_values[-1] <= tol:
        raise RankDeficiencyError(f.singular_values[-1])
    u = f.u @ f.v.T
    h = (f.v * f.singular_values) @ f.v.T
    h = 0.5 * (h + h.T)
    return PolarFactors(u, h)


def rank_is_full(a, tol: float = RANK_TOL) -> tuple[bool, float]:
    """Return ``(sigma_min > tol, sigma_min)`` for the column rank of ``a``."""
    a = as_matrix(a)
    s = np.linalg.svd(a, compute_uv=False)
    # a wide matrix cannot have full column rank
    sigma_min = float(s[-1]) if a.shape[0] >= a.shape[1] else 0.0
    return sigma_min > tol, sigma_min


def det_rank_is_full(a, tol: float = RANK_TOL) -> bool:
    """Determinant form of the full-column-rank test: ``det(a^T a) > tol**k``.

    Cheaper than an SVD for small ``k``; `rank_is_full` is the authoritative test.
    """
    a = as_matrix(a)
    k = a.shape[1]
    return bool(np.linalg.det(a.T @ a) > tol**k)


def batch_det_gram(a: np.ndarray) -> np.ndarray:
    """``det(a_i^T a_i)`` for a stack of matrices of shape (m, s, t)."""
    a = np.asarray(a, dtype=np.float64)
    return np.linalg.det(np.swapaxes(a, -1, -2) @ a)


def batch_polar(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal factor ``U V^T`` and singular values for a stack (m, s, t), s >= t.

    For rank-deficient members the returned factor is still a nearest matrix with
    orthonormal columns, just not a unique one.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape[-1] == 1:
        norms = np.linalg.norm(a[..., 0], axis=-1)
        safe = np.where(norms > 0, norms, 1.0)
        u = a / safe[..., None, None]
        if np.any(norms == 0):
            e1 = np.zeros(a.shape[-2])
            e1[0] = 1.0
            u[norms == 0, :, 0] = e1
        return u, norms[..., None]
    try:
        p, s, qt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(a.shape) from exc
    return p @ qt, s


def batch_singular_values(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.shape[-1] == 1:
        return np.linalg.norm(a[..., 0], axis=-1)[..., None]
    return np.linalg.svd(a, compute_uv=False)


def rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator for ``seed``, optionally split along integer ``keys``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=keys)))


def gaussian_matrix(rows: int, cols: int, seed: int, *keys: int) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    return rng(seed, *keys).standard_normal((rows, cols))
