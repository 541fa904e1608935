"""Finding the embedding alpha: PCA initialisation, RANSAC screening and Riemannian ascent.

The objective is the mean nuclear norm ``f(alpha) = mean_y ||alpha^T y||_*``, which is
maximised exactly where the mean squared projection error is minimised
(``||y - pi(y)||^2 = 2k - 2 ||alpha^T y||_*``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, EmptySurvivorsError, RankDeficiencyError
from .linalg import RANK_TOL, batch_polar, batch_singular_values, rng
from .projection import distance_to_image
from .stiefel import TangentVector, as_stack, retract

TIE_GAP = 1e-12


class AmbiguousSubspaceWarning(UserWarning):
    """The n-th and (n+1)-th eigenvalues tie, so the PCA subspace is not unique."""


@dataclass
class GdConfig:
    max_iters: int = 1000
    grad_tol: float = 1e-6
    initial_step: float = 1.0
    armijo_shrink: float = 0.5
    armijo_slope: float = 1e-4
    min_step: float = 1e-12
    step_growth: float = 2.0  # first trial step is the last accepted step times this
    max_step: float = 1e4

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.grad_tol < 0:
            raise ValueError("grad_tol must be nonnegative")
        if not 0 < self.min_step <= self.initial_step <= self.max_step:
            raise ValueError("need 0 < min_step <= initial_step <= max_step")
        if not 0 < self.armijo_shrink < 1 or not 0 < self.armijo_slope < 1:
            raise ValueError("armijo_shrink and armijo_slope must lie in (0, 1)")
        if self.step_growth < 1:
            raise ValueError("step_growth must be >= 1")


@dataclass
class RansacConfig:
    keep_fraction: float = 0.99
    outlier_threshold: float = 3.0
    max_rounds: int = 50
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.keep_fraction <= 1:
            raise ValueError("keep_fraction must lie in (0, 1]")
        if self.outlier_threshold <= 0:
            raise ValueError("outlier_threshold must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be positive")


class TraceRecord(NamedTuple):
    iteration: int
    cost: float
    grad_norm: float
    step: float


@dataclass
class CostTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def append(self, *values):
        self.records.append(TraceRecord(*values))

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.records])

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


@dataclass
class AscentResult:
    alpha: np.ndarray
    trace: CostTrace
    status: str  # converged | step_too_small | max_iters

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1


@dataclass
class RansacResult:
    alpha: np.ndarray
    kept: np.ndarray
    removed: np.ndarray
    rounds: int


def _as_alpha(alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 2 or alpha.shape[0] < alpha.shape[1]:
        raise ValueError(f"alpha must be an N x n matrix with N >= n, got {alpha.shape}")
    return alpha


def cost(alpha, data) -> float:
    """Mean nuclear norm of ``alpha^T y``; bounded above by k."""
    alpha = _as_alpha(alpha)
    ys = as_stack(data)
    if ys.shape[0] == 0:
        return 0.0
    s = batch_singular_values(alpha.T @ ys)
    return float(np.mean(np.sum(s, axis=1)))


def _cost_and_gradient(alpha: np.ndarray, ys: np.ndarray, tol: float):
    a = alpha.T @ ys
    y_hat, s = batch_polar(a)
    sigma_min = s[:, -1]
    bad = np.flatnonzero(sigma_min <= tol)
    if bad.size:
        raise DomainError(sigma_min[bad[0]], index=int(bad[0]))
    f = float(np.mean(np.sum(s, axis=1)))
    euclid = np.tensordot(ys, y_hat, axes=([0, 2], [0, 2])) / ys.shape[0]
    # alpha^T (y y_hat^T) is symmetric, so only the normal-space component survives
    direction = euclid - alpha @ (alpha.T @ euclid)
    return f, direction


def euclidean_gradient(alpha, data) -> np.ndarray:
    """The subgradient ``mean_y y @ y_hat^T`` of the objective in R^{N x n}."""
    alpha = _as_alpha(alpha)
    ys = as_stack(data)
    y_hat, _ = batch_polar(alpha.T @ ys)
    return np.tensordot(ys, y_hat, axes=([0, 2], [0, 2])) / ys.shape[0]


def riemannian_gradient(alpha, data, tol: float = RANK_TOL) -> TangentVector:
    """``(I - alpha alpha^T) mean_y y y_hat^T``, the Riemannian gradient on V_n(R^N)."""
    alpha = _as_alpha(alpha)
    _, direction = _cost_and_gradient(alpha, as_stack(data), tol)
    return TangentVector(alpha, direction)


def second_moment(data) -> np.ndarray:
    ys = as_stack(data)
    return np.tensordot(ys, ys, axes=([0, 2], [0, 2])) / ys.shape[0]


def alpha_pca(data, n: int, variant: str = "eig") -> np.ndarray:
    """Top-n principal subspace of the frames, as an N x n orthonormal matrix.

    ``eig`` diagonalises the second-moment matrix ``mean_y y y^T``; ``concat-svd`` takes
    left singular vectors of the horizontally concatenated frames. Both span the same
    subspace whenever the n-th eigenvalue is strictly above the (n+1)-th.
    """
    ys = as_stack(data)
    m, N, k = ys.shape
    if m == 0:
        raise ValueError("alpha_pca needs a nonempty dataset")
    if not k <= n <= N:
        raise ValueError(f"need k <= n <= N, got k={k}, n={n}, N={N}")
    if variant == "eig":
        evals, evecs = np.linalg.eigh(second_moment(ys))
        order = np.argsort(evals)[::-1]
        evals, evecs = evals[order], evecs[:, order]
        alpha = evecs[:, :n]
    elif variant == "concat-svd":
        wide = np.transpose(ys, (1, 0, 2)).reshape(N, m * k)
        u, s, _ = np.linalg.svd(wide, full_matrices=False)
        evals = np.zeros(N)
        evals[: s.size] = s**2 / m
        alpha = u[:, :n]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if n < N and evals[n - 1] - evals[n] < TIE_GAP:
        warnings.warn(
            f"eigenvalues {n} and {n + 1} tie (gap {evals[n - 1] - evals[n]:.2e}); "
            "the principal subspace is not unique",
            AmbiguousSubspaceWarning,
            stacklevel=2,
        )
    # re-orthonormalise against rounding in the eigensolver
    q, r = np.linalg.qr(alpha)
    return q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))


def ransac_init(data, n: int, config: RansacConfig | None = None, variant: str = "eig") -> RansacResult:
    """RANSAC-style screening around `alpha_pca`.

    Each round fits alpha_PCA to a random ``keep_fraction`` subsample of the surviving
    points, then drops every surviving point whose distance to the image exceeds the
    mean distance by more than ``outlier_threshold`` standard deviations.
    """
    config = config or RansacConfig()
    ys = as_stack(data)
    m = ys.shape[0]
    if m == 0:
        raise ValueError("ransac_init needs a nonempty dataset")
    kept = np.arange(m)
    gen = rng(config.seed)
    alpha = None
    for round_ in range(1, config.max_rounds + 1):
        size = max(1, int(round(config.keep_fraction * kept.size)))
        sample = np.sort(gen.choice(kept, size=size, replace=False))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AmbiguousSubspaceWarning)
            alpha = alpha_pca(ys[sample], n, variant)
        dist = distance_to_image(alpha, ys[kept])
        mean, std = dist.mean(), dist.std()
        # absolute floor keeps rounding noise in exact fits from being flagged
        flagged = (dist - mean > config.outlier_threshold * std) & (dist - mean > 1e-8)
        if not flagged.any():
            break
        kept = kept[~flagged]
        if kept.size == 0:
            raise EmptySurvivorsError("RANSAC removed every data point")
    removed = np.setdiff1d(np.arange(m), kept)
    return RansacResult(alpha, kept, removed, round_)


def gradient_ascent(data, init, config: GdConfig | None = None, tol: float = RANK_TOL) -> AscentResult:
    """Armijo-backtracking Riemannian gradient ascent of `cost` with polar retraction.

    Trial points that push any frame out of the projection domain are rejected like
    any other failed Armijo test.
    """
    config = config or GdConfig()
    ys = as_stack(data)
    alpha = _as_alpha(init).copy()
    f, grad = _cost_and_gradient(alpha, ys, tol)
    gnorm = float(np.linalg.norm(grad))
    trace = CostTrace()
    trace.append(0, f, gnorm, 0.0)
    status = "max_iters"
    step = config.initial_step / config.step_growth
    for it in range(1, config.max_iters + 1):
        if gnorm < config.grad_tol:
            status = "converged"
            break
        step = min(step * config.step_growth, config.max_step)
        accepted = None
        while step >= config.min_step:
            try:
                trial = retract(alpha, step * grad, tol=tol)
                f_new, grad_new = _cost_and_gradient(trial, ys, tol)
            except (DomainError, RankDeficiencyError):
                step *= config.armijo_shrink
                continue
            if f_new >= f + config.armijo_slope * step * gnorm**2:
                accepted = trial
                break
            step *= config.armijo_shrink
        if accepted is None:
            status = "step_too_small"
            break
        alpha, f, grad = accepted, f_new, grad_new
        gnorm = float(np.linalg.norm(grad))
        trace.append(it, f, gnorm, step)
    else:
        if gnorm < config.grad_tol:
            status = "converged"
    return AscentResult(alpha, trace, status)
