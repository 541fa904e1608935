"""End-to-end Stiefel coordinate fit and its Grassmannian wrapper."""

from __future__ import annotations

import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import EmptySurvivorsError
from .fit import (
    AmbiguousSubspaceWarning,
    CostTrace,
    GdConfig,
    RansacConfig,
    alpha_pca,
    cost,
    gradient_ascent,
    ransac_init,
)
from .linalg import RANK_TOL
from .projection import ProjectionBatch, project_batch
from .stiefel import FrameDataset, as_stack

REMOVAL_WARNING_FRACTION = 0.10


class RemovalWarning(UserWarning):
    pass


@dataclass(eq=False)
class FitReport:
    """Everything produced by one `psc_fit` run.

    Index arrays refer to positions in the input dataset. ``outcomes`` holds the final
    projection of the surviving points, in the order of ``surviving``.
    """

    N: int
    n: int
    k: int
    alpha_pca: np.ndarray
    alpha_gd: np.ndarray
    cost_trace: CostTrace
    status: str
    surviving: np.ndarray
    removed_ransac: np.ndarray
    removed_pca: np.ndarray
    removed_gd: np.ndarray
    outcomes: ProjectionBatch
    mse: float
    cost_pca: float
    cost_gd: float
    seed: int | None = None
    config: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def removal_warnings(self) -> list[str]:
        return [w for w in self.warnings if w.startswith("removal:")]


def _check_n(data: np.ndarray, n: int):
    _, N, k = data.shape
    if not (isinstance(n, (int, np.integer)) and k <= n <= N):
        raise ValueError(f"target dimension must satisfy k <= n <= N (k={k}, N={N}), got n={n}")


def psc_fit(
    data,
    n: int,
    gd_config: GdConfig | None = None,
    ransac_config: RansacConfig | None = None,
    tol: float = RANK_TOL,
    pca_variant: str = "eig",
) -> FitReport:
    """Fit alpha_PCA then alpha_GD to ``data`` and project the survivors.

    Points outside the projection domain of alpha_PCA (and then alpha_GD) are dropped
    and recorded. Optional RANSAC screening runs before the PCA step.
    """
    gd_config = gd_config or GdConfig()
    ys = as_stack(data)
    m, N, k = ys.shape
    _check_n(ys, n)
    if m == 0:
        raise EmptySurvivorsError("dataset is empty")
    notes: list[str] = []
    timing = {}
    t0 = time.perf_counter()

    active = np.arange(m)
    removed_ransac = np.zeros(0, dtype=np.int64)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AmbiguousSubspaceWarning)
        if ransac_config is not None:
            rr = ransac_init(ys, n, ransac_config, variant=pca_variant)
            active, removed_ransac, a_pca = rr.kept, rr.removed, rr.alpha
        else:
            a_pca = alpha_pca(ys, n, variant=pca_variant)
    notes += [f"pca: {w.message}" for w in caught if issubclass(w.category, AmbiguousSubspaceWarning)]
    timing["pca"] = time.perf_counter() - t0

    screen = project_batch(a_pca, ys[active], tol=tol)
    removed_pca = active[~screen.in_domain]
    active = active[screen.in_domain]
    if active.size == 0:
        raise EmptySurvivorsError("no data point lies in the domain of alpha_PCA")

    t1 = time.perf_counter()
    ascent = gradient_ascent(ys[active], a_pca, gd_config, tol=tol)
    timing["gradient_ascent"] = time.perf_counter() - t1
    a_gd = ascent.alpha

    outcomes = project_batch(a_gd, ys[active], tol=tol)
    removed_gd = active[~outcomes.in_domain]
    if removed_gd.size:
        active = active[outcomes.in_domain]
        if active.size == 0:
            raise EmptySurvivorsError("no data point lies in the domain of alpha_GD")
        outcomes = project_batch(a_gd, ys[active], tol=tol)

    for stage, idx in (("ransac", removed_ransac), ("pca", removed_pca), ("gd", removed_gd)):
        if idx.size:
            notes.append(f"removal: {idx.size} point(s) dropped at the {stage} stage")
    total_removed = m - active.size
    if total_removed > REMOVAL_WARNING_FRACTION * m:
        notes.append(
            f"removal: {total_removed} of {m} points ({100 * total_removed / m:.1f}%) were "
            "removed; the data may not lie near a linearly embedded Stiefel manifold"
        )
    for note in notes:
        if note.startswith("removal:"):
            warnings.warn(note, RemovalWarning, stacklevel=2)

    timing["total"] = time.perf_counter() - t0
    config = {"gd": asdict(gd_config), "tol": tol, "pca_variant": pca_variant}
    if ransac_config is not None:
        config["ransac"] = asdict(ransac_config)
    return FitReport(
        N=N,
        n=n,
        k=k,
        alpha_pca=a_pca,
        alpha_gd=a_gd,
        cost_trace=ascent.trace,
        status=ascent.status,
        surviving=active,
        removed_ransac=removed_ransac,
        removed_pca=removed_pca,
        removed_gd=removed_gd,
        outcomes=outcomes,
        mse=float(np.mean(outcomes.residuals**2)),
        cost_pca=cost(a_pca, ys[active]),
        cost_gd=cost(a_gd, ys[active]),
        seed=None if ransac_config is None else ransac_config.seed,
        config=config,
        warnings=notes,
        timing=timing,
    )


def recover_low_dim(report: FitReport, labels=None) -> FrameDataset:
    """The coordinates y_hat in V_k(R^n) of the surviving points."""
    if len(report.outcomes) == 0:
        return FrameDataset.empty(report.n, report.k, source="psc")
    if labels is not None:
        labels = np.asarray(labels)[report.surviving]
    return FrameDataset(report.outcomes.y_hat, labels=labels, source="psc")


@dataclass(frozen=True, eq=False)
class GrassmannPoint:
    """A k-dimensional subspace, represented by any orthonormal basis of it."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.float64)
        if b.ndim == 1:
            b = b[:, None]
        object.__setattr__(self, "basis", b)

    @classmethod
    def from_projector(cls, projector: np.ndarray, k: int) -> "GrassmannPoint":
        return cls(lift(projector, k))

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def equals(self, other: "GrassmannPoint", tol: float = 1e-8) -> bool:
        return bool(np.linalg.norm(self.projector - other.projector) <= tol)


def lift(projector: np.ndarray, k: int) -> np.ndarray:
    """Deterministic orthonormal basis of a rank-k projector: its top-k left singular vectors."""
    u, _, _ = np.linalg.svd(np.asarray(projector, dtype=np.float64))
    return u[:, :k]


def grassmann_reduce(
    points,
    n: int,
    gd_config: GdConfig | None = None,
    ransac_config: RansacConfig | None = None,
    tol: float = RANK_TOL,
) -> tuple[list[GrassmannPoint], FitReport]:
    """Reduce subspaces of R^N to subspaces of R^n.

    Each subspace is lifted to a basis computed from its projector, so the output
    depends only on the subspaces and not on the bases supplied.
    """
    points = list(points)
    if not points:
        raise EmptySurvivorsError("no subspaces given")
    k = points[0].basis.shape[1]
    frames = np.stack([lift(p.projector, k) for p in points])
    report = psc_fit(frames, n, gd_config, ransac_config, tol=tol)
    reduced = [GrassmannPoint(x) for x in report.outcomes.y_hat]
    return reduced, report
