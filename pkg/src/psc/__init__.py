"""Equivariant dimensionality reduction for data on Stiefel manifolds.

Frames y in V_k(R^N) are mapped to V_k(R^n) through an embedding alpha in V_n(R^N) by
``y -> polar(alpha^T y)``. The embedding is initialised from the principal subspace of
the data and refined by Riemannian gradient ascent of the mean nuclear norm.
"""

from .errors import (
    DegenerateMeanError,
    DegenerateStepError,
    DomainError,
    EmptySurvivorsError,
    NotOrthonormalError,
    PSCError,
    RankDeficiencyError,
)
from .fit import GdConfig, RansacConfig, alpha_pca, cost, gradient_ascent, ransac_init, riemannian_gradient
from .pipeline import FitReport, GrassmannPoint, grassmann_reduce, psc_fit, recover_low_dim
from .projection import ProjectionOutcome, domain_check, project, project_batch
from .stiefel import FrameDataset, StiefelPoint, frechet_mean, frechet_variance, uniform_stiefel

__all__ = [
    "DegenerateMeanError",
    "DegenerateStepError",
    "DomainError",
    "EmptySurvivorsError",
    "FitReport",
    "FrameDataset",
    "GdConfig",
    "GrassmannPoint",
    "NotOrthonormalError",
    "PSCError",
    "ProjectionOutcome",
    "RankDeficiencyError",
    "RansacConfig",
    "StiefelPoint",
    "alpha_pca",
    "cost",
    "domain_check",
    "frechet_mean",
    "frechet_variance",
    "gradient_ascent",
    "grassmann_reduce",
    "project",
    "project_batch",
    "psc_fit",
    "ransac_init",
    "recover_low_dim",
    "riemannian_gradient",
    "uniform_stiefel",
]
