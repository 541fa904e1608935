"""Scaled-down synthetic experiments, each writing datasets, reports and a summary.

Trial ``t`` of a run with base seed ``s`` uses seed ``s + t``. Every file written is a
deterministic function of the arguments, so reruns are byte-identical.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.stats import ttest_rel

from . import io
from .datagen import (
    BundleConfig,
    NoisyEmbedConfig,
    StimulusConfig,
    generate_noisy_embedded,
    generate_stimulus_walk,
    mobius_lift,
    preprocess_responses,
    torus_whitney_lift,
)
from .evaluate import landscape, recover_path, variance_ratio
from .fit import cost
from .pipeline import FitReport, RemovalWarning, psc_fit, recover_low_dim
from .projection import project_batch
from .stiefel import FrameDataset


def pca_mse(report: FitReport, data) -> float:
    """Mean squared residual of alpha_PCA over the same survivors the report scores."""
    pts = data.points if isinstance(data, FrameDataset) else np.asarray(data)
    batch = project_batch(report.alpha_pca, pts[report.surviving])
    return float(np.mean(batch.residuals**2))


def paired_test(gd, pca) -> dict:
    """One-sided paired t-test of mse(alpha_GD) < mse(alpha_PCA)."""
    gd, pca = np.asarray(gd, float), np.asarray(pca, float)
    p = float(ttest_rel(gd, pca, alternative="less").pvalue) if gd.size > 1 else float("nan")
    return {
        "mean_mse_gd": float(gd.mean()),
        "mean_mse_pca": float(pca.mean()),
        "p_value": None if np.isnan(p) else p,
        "gd_better_every_trial": bool(np.all(gd < pca)),
    }


def _fit(data, n, gd_config=None) -> FitReport:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RemovalWarning)
        return psc_fit(data, n, gd_config)


def _write_table(path, rows: list[dict]):
    if not rows:
        io.atomic_write_text(path, "")
        return
    keys = list(rows[0])

    def fmt(v):
        if isinstance(v, float):
            return io.format_float(v)
        return "" if v is None else str(v)

    lines = [",".join(keys)] + [",".join(fmt(r[k]) for k in keys) for r in rows]
    io.atomic_write_text(path, "\n".join(lines) + "\n")


def _finish(out: Path, name: str, params: dict, rows: list[dict], stats: dict) -> dict:
    summary = {"experiment": name, "params": params, "trials": rows, **stats}
    io.write_json(out / "summary.json", summary)
    _write_table(out / "summary.csv", rows)
    return summary


@dataclass
class CircleParams:
    N: int = 3
    n: int = 2
    k: int = 1
    count: int = 100
    epsilon: float = 0.8
    resolution: tuple[int, int] = (73, 19)


def run_circle(out, seed: int = 0, trials: int = 20, params: CircleParams | None = None) -> dict:
    """Noisy great-circle data in V_1(R^3): costs of the generating, PCA and GD embeddings,
    and the loss landscape over all planes."""
    p = params or CircleParams()
    out = Path(out)
    rows = []
    for t in range(trials):
        s = seed + t
        gen = generate_noisy_embedded(NoisyEmbedConfig(p.N, p.n, p.k, p.count, p.epsilon, s))
        report = _fit(gen.dataset, p.n)
        grid = landscape(
            gen.dataset,
            p.resolution,
            markers={"true": gen.alpha, "pca": report.alpha_pca, "gd": report.alpha_gd},
        )
        trial_dir = out / f"trial_{t:03d}"
        io.write_dataset(trial_dir / "data.csv", gen.dataset)
        io.write_dataset(trial_dir / "alpha_true.csv", FrameDataset(gen.alpha[None]))
        io.write_report(trial_dir / "report.json", report)
        _write_table(
            trial_dir / "landscape.csv",
            [{"theta": a, "phi": b, "cost": c} for a, b, c in grid.rows()],
        )
        rows.append(
            {
                "trial": t,
                "seed": s,
                "cost_true": cost(gen.alpha, gen.dataset),
                "cost_pca": report.cost_pca,
                "cost_gd": report.cost_gd,
                "grid_max": float(grid.cost.max()),
                "top_cell_to_gd": grid.cell_distance(grid.argmax(), grid.markers["gd"]),
            }
        )
    stats = {
        "gd_at_least_pca_every_trial": all(r["cost_gd"] >= r["cost_pca"] for r in rows),
        "pca_above_true_every_trial": all(r["cost_pca"] >= r["cost_true"] for r in rows),
    }
    return _finish(out, "circle", asdict(p), rows, stats)


@dataclass
class VarianceParams:
    N: int = 11
    n_generating: int = 6
    k: int = 1
    count: int = 200
    epsilons: tuple[float, ...] = (0.01, 0.05, 0.1, 0.5)
    targets: tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8, 9, 10, 11)


def run_variance(out, seed: int = 0, trials: int = 5, params: VarianceParams | None = None) -> dict:
    """Variance ratio of the projected data against target dimension, for several noise levels."""
    p = params or VarianceParams()
    out = Path(out)
    rows = []
    for eps in p.epsilons:
        ratios = np.zeros((trials, len(p.targets)))
        for t in range(trials):
            gen = generate_noisy_embedded(
                NoisyEmbedConfig(p.N, p.n_generating, p.k, p.count, eps, seed + t)
            )
            for j, n in enumerate(p.targets):
                ratios[t, j] = variance_ratio(_fit(gen.dataset, n), gen.dataset)
        for j, n in enumerate(p.targets):
            rows.append({"epsilon": eps, "n": n, "mean_ratio": float(ratios[:, j].mean())})
    means = {}
    for r in rows:
        means.setdefault(r["epsilon"], []).append(r["mean_ratio"])
    stats = {
        "nondecreasing_in_n": {
            str(e): bool(np.all(np.diff(v) >= -1e-12)) for e, v in means.items()
        }
    }
    return _finish(out, "variance", asdict(p), rows, stats)


@dataclass
class StimulusParams:
    neuron_count: int = 100
    walk_length: int = 13000
    walk_step_std: float = 0.01
    centering: str = "population"
    smoothing_sigma: float = 100.0
    write_inputs: bool = True


def run_stimulus(out, seed: int = 0, trials: int = 1, params: StimulusParams | None = None) -> dict:
    """Tent-tuned population on a half-circle walk: path recovery with alpha_GD and alpha_PCA."""
    p = params or StimulusParams()
    out = Path(out)
    rows = []
    for t in range(trials):
        s = seed + t
        config = StimulusConfig(
            neuron_count=p.neuron_count, walk_length=p.walk_length, walk_step_std=p.walk_step_std, seed=s
        )
        responses, walk = generate_stimulus_walk(config)
        data = preprocess_responses(responses, centering=p.centering)
        report = _fit(data, 2)
        truth = walk[report.surviving]
        gd = recover_path(report.outcomes.y_hat, truth, p.smoothing_sigma)
        pca_low = project_batch(report.alpha_pca, data.points[report.surviving]).y_hat
        pca = recover_path(pca_low, truth, p.smoothing_sigma)
        trial_dir = out / f"trial_{t:03d}"
        if p.write_inputs:
            io.write_dataset(trial_dir / "data.csv", data)
        io.write_column_csv(trial_dir / "angles_true.csv", walk)
        io.write_report(trial_dir / "report.json", report)
        io.write_dataset(trial_dir / "low_dim.csv", recover_low_dim(report))
        _write_table(
            trial_dir / "path.csv",
            [
                {"raw": a, "aligned": b, "smoothed": c, "smoothed_truth": d}
                for a, b, c, d in zip(gd.raw, gd.aligned, gd.smoothed, gd.smoothed_truth)
            ],
        )
        rows.append(
            {
                "trial": t,
                "seed": s,
                "path_mse_gd": gd.mse,
                "path_mse_pca": pca.mse,
                "fit_mse_gd": report.mse,
                "fit_mse_pca": pca_mse(report, data),
                "removed": int(len(data) - report.surviving.size),
            }
        )
    stats = {"gd_better_every_trial": all(r["path_mse_gd"] < r["path_mse_pca"] for r in rows)}
    return _finish(out, "stimulus", asdict(p), rows, stats)


@dataclass
class MobiusParams:
    chart_count: int = 25
    sample_count: int = 1000
    n: int = 2


def run_mobius(out, seed: int = 0, trials: int = 10, params: MobiusParams | None = None) -> dict:
    """Frames lifted from the Moebius bundle over the circle, reduced to V_1(R^2)."""
    p = params or MobiusParams()
    out = Path(out)
    rows = []
    for t in range(trials):
        s = seed + t
        data, b = mobius_lift(BundleConfig(p.chart_count, p.sample_count, seed=s))
        report = _fit(data, p.n)
        trial_dir = out / f"trial_{t:03d}"
        io.write_dataset(trial_dir / "data.csv", data)
        io.write_column_csv(trial_dir / "base_points.csv", b)
        io.write_report(trial_dir / "report.json", report)
        rows.append({"trial": t, "seed": s, "mse_gd": report.mse, "mse_pca": pca_mse(report, data)})
    stats = paired_test([r["mse_gd"] for r in rows], [r["mse_pca"] for r in rows])
    return _finish(out, "mobius", asdict(p), rows, stats)


@dataclass
class TorusParams:
    chart_count: int = 10
    sample_count: int = 1000
    n: int = 2
    curves: tuple[tuple[int, int], ...] = ((1, 1), (1, 15))


def run_torus(out, seed: int = 0, trials: int = 5, params: TorusParams | None = None) -> dict:
    """Frames lifted from the Whitney sum of Moebius bundles over the torus, sampled along
    (p, q)-curves and reduced to V_2(R^2)."""
    p = params or TorusParams()
    out = Path(out)
    rows = []
    stats = {}
    for cp, cq in p.curves:
        label = f"{cp}_{cq}"
        curve_rows = []
        for t in range(trials):
            s = seed + t
            config = BundleConfig(p.chart_count, p.sample_count, mode="pq_curve", p=cp, q=cq, seed=s)
            data, param = torus_whitney_lift(config)
            report = _fit(data, p.n)
            trial_dir = out / f"curve_{label}" / f"trial_{t:03d}"
            io.write_dataset(trial_dir / "data.csv", data)
            io.write_column_csv(trial_dir / "curve_parameter.csv", param)
            io.write_report(trial_dir / "report.json", report)
            curve_rows.append(
                {"curve": label, "trial": t, "seed": s, "mse_gd": report.mse, "mse_pca": pca_mse(report, data)}
            )
        stats[label] = paired_test([r["mse_gd"] for r in curve_rows], [r["mse_pca"] for r in curve_rows])
        rows += curve_rows
    return _finish(out, "torus", asdict(p), rows, stats)


RUNNERS = {
    "circle": (run_circle, 20),
    "variance": (run_variance, 5),
    "stimulus": (run_stimulus, 1),
    "mobius": (run_mobius, 10),
    "torus": (run_torus, 5),
}
