"""Command-line interface: ``psc generate | fit | project | eval | reproduce``.

Exit status: 0 success, 2 usage or input errors, 3 points were removed during a fit,
4 no point survived, 5 a statistic was degenerate.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

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
from .errors import DegenerateMeanError, DegenerateStepError, EmptySurvivorsError, PSCError
from .evaluate import adjusted_rand_index, kmeans_stiefel, landscape, recover_path, spectrum
from .experiments import RUNNERS
from .fit import AmbiguousSubspaceWarning, GdConfig, RansacConfig, cost
from .pipeline import RemovalWarning, psc_fit, recover_low_dim
from .projection import project_batch
from .stiefel import FrameDataset, frechet_variance

EXIT_OK, EXIT_USAGE, EXIT_REMOVED, EXIT_EMPTY, EXIT_DEGENERATE = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _sidecar(path: Path, name: str) -> Path:
    return path.with_name(f"{path.stem}.{name}.csv")


def _emit(text: str, out: str | None):
    if out:
        io.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _table(header: list[str], rows) -> str:
    def fmt(v):
        return io.format_float(v) if isinstance(v, float) else str(v)

    return "\n".join([",".join(header)] + [",".join(fmt(v) for v in r) for r in rows]) + "\n"


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    out = Path(args.out)
    if args.kind == "noisy-embed":
        gen = generate_noisy_embedded(
            NoisyEmbedConfig(args.N, args.n, args.k, args.count, args.eps, args.seed)
        )
        io.write_dataset(out, gen.dataset)
        io.write_dataset(_sidecar(out, "alpha"), FrameDataset(gen.alpha[None]))
    elif args.kind == "stimulus":
        config = StimulusConfig(
            neuron_count=args.neurons,
            walk_length=args.steps,
            walk_step_std=args.step_std,
            seed=args.seed,
        )
        responses, walk = generate_stimulus_walk(config)
        io.write_dataset(out, preprocess_responses(responses, centering=args.centering))
        io.write_column_csv(_sidecar(out, "angles"), walk)
    elif args.kind == "mobius":
        data, b = mobius_lift(BundleConfig(args.J, args.count, seed=args.seed))
        io.write_dataset(out, data)
        io.write_column_csv(_sidecar(out, "angles"), b)
    elif args.kind == "torus":
        if args.curve:
            config = BundleConfig(args.J, args.count, "pq_curve", *args.curve, seed=args.seed)
        else:
            config = BundleConfig(args.J, args.count, seed=args.seed)
        data, truth = torus_whitney_lift(config)
        io.write_dataset(out, data)
        io.write_column_csv(_sidecar(out, "angles"), truth)
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit / project


def _gd_config(args) -> GdConfig:
    return GdConfig(
        max_iters=args.max_iters,
        grad_tol=args.grad_tol,
        initial_step=args.initial_step,
    )


def cmd_fit(args) -> int:
    data = io.read_dataset(args.dataset, renormalize=args.renormalize)
    N, k = data.ambient_dim, data.frame_size
    if not k <= args.n <= N:
        raise UsageError(f"--n must satisfy k <= n <= N (k={k}, N={N}), got {args.n}")
    ransac = None
    if args.ransac:
        ransac = RansacConfig(
            keep_fraction=args.keep_fraction,
            outlier_threshold=args.outlier_threshold,
            max_rounds=args.max_rounds,
            seed=args.seed,
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RemovalWarning)
        warnings.simplefilter("ignore", AmbiguousSubspaceWarning)
        report = psc_fit(data, args.n, _gd_config(args), ransac, pca_variant=args.pca_variant)
    report.seed = args.seed
    base = Path(args.dataset)
    report_path = Path(args.report or base.with_name(f"{base.stem}.report.json"))
    low_path = Path(args.low_dim or base.with_name(f"{base.stem}.lowdim.csv"))
    io.write_report(report_path, report)
    io.write_dataset(low_path, recover_low_dim(report, data.labels))
    print(
        f"status={report.status} iterations={len(report.cost_trace) - 1} "
        f"cost_pca={report.cost_pca!r} cost_gd={report.cost_gd!r} mse={report.mse!r} "
        f"surviving={report.surviving.size}/{len(data)}"
    )
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {report_path} and {low_path}")
    return EXIT_REMOVED if report.surviving.size < len(data) else EXIT_OK


def _alpha_from_report(path) -> np.ndarray:
    return np.asarray(io.read_report(path)["alpha_gd"], dtype=np.float64)


def cmd_project(args) -> int:
    data = io.read_dataset(args.dataset, renormalize=args.renormalize)
    alpha = _alpha_from_report(args.report)
    if alpha.shape[0] != data.ambient_dim:
        raise UsageError(f"report alpha has N={alpha.shape[0]}, dataset has N={data.ambient_dim}")
    batch = project_batch(alpha, data)
    if not batch.in_domain.any():
        raise EmptySurvivorsError("no point lies in the projection domain")
    labels = None if data.labels is None else data.labels[batch.in_domain]
    io.write_dataset(args.out, FrameDataset(batch.y_hat[batch.in_domain], labels=labels))
    dropped = batch.out_of_domain
    if dropped.size:
        print(f"warning: {dropped.size} point(s) outside the domain: {dropped.tolist()}", file=sys.stderr)
        return EXIT_REMOVED
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval


def cmd_eval(args) -> int:
    kind = args.kind
    if kind == "mse":
        report = io.read_report(args.report)
        r = np.asarray(report["residuals"], dtype=np.float64)
        if r.size == 0:
            raise EmptySurvivorsError("report has no surviving points")
        _emit(f"{float(np.mean(r ** 2))!r}\n", args.out)
    elif kind == "variance-ratio":
        data = io.read_dataset(args.data, renormalize=args.renormalize)
        report = io.read_report(args.report)
        alpha = np.asarray(report["alpha_gd"], dtype=np.float64)
        ys = data.points[np.asarray(report["surviving"], dtype=np.int64)]
        projected = project_batch(alpha, ys).projected
        ratio = frechet_variance(projected) / frechet_variance(ys)
        _emit(f"{ratio!r}\n", args.out)
    elif kind == "spectrum":
        data = io.read_dataset(args.data, renormalize=args.renormalize)
        values = spectrum(data)
        _emit(_table(["index", "eigenvalue"], ((i + 1, float(v)) for i, v in enumerate(values))), args.out)
    elif kind == "landscape":
        data = io.read_dataset(args.data, renormalize=args.renormalize)
        markers = {}
        if args.report:
            report = io.read_report(args.report)
            markers["pca"] = np.asarray(report["alpha_pca"])
            markers["gd"] = np.asarray(report["alpha_gd"])
        if args.alpha:
            markers["true"] = io.read_dataset(args.alpha).points[0]
        grid = landscape(data, tuple(args.resolution), markers)
        rows = [("grid", t, p, c) for t, p, c in grid.rows()]
        rows += [(name, t, p, cost(markers[name], data)) for name, (t, p) in grid.markers.items()]
        _emit(_table(["kind", "theta", "phi", "cost"], rows), args.out)
    elif kind == "path":
        low = io.read_dataset(args.low_dim)
        truth = io.read_column_csv(args.truth)
        if args.report:
            truth = truth[np.asarray(io.read_report(args.report)["surviving"], dtype=np.int64)]
        rec = recover_path(low, truth, args.sigma)
        rows = zip(range(len(rec.raw)), rec.raw, rec.grassmann, rec.aligned, rec.smoothed, rec.smoothed_truth)
        text = _table(["t", "raw", "grassmann", "aligned", "smoothed", "smoothed_truth"], rows)
        _emit(text + f"# mse={rec.mse!r} scale={rec.scale!r} offset={rec.offset!r}\n", args.out)
    elif kind == "kmeans":
        data = io.read_dataset(args.data, renormalize=args.renormalize)
        result = kmeans_stiefel(data, args.clusters, seed=args.seed, restarts=args.restarts)
        if result.repairs:
            print(f"note: {result.repairs} centroid repair(s) during clustering", file=sys.stderr)
        _emit("\n".join(str(int(v)) for v in result.labels) + "\n", args.out)
    elif kind == "ari":
        a = io.read_column_csv(args.a, dtype=int)
        b = io.read_column_csv(args.b, dtype=int)
        _emit(f"{adjusted_rand_index(a, b)!r}\n", args.out)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    runner, default_trials = RUNNERS[args.experiment]
    trials = default_trials if args.trials is None else args.trials
    out = Path(args.out or f"results/{args.experiment}_seed{args.seed}")
    summary = runner(out, seed=args.seed, trials=trials)
    stats = {k: v for k, v in summary.items() if k not in ("trials", "params")}
    print(json.dumps(summary["trials"], indent=1))
    print(json.dumps(stats, indent=1))
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psc", description="Dimensionality reduction for orthonormal-frame data")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset and its ground truth")
    gsub = gen.add_subparsers(dest="kind", required=True)
    g = gsub.add_parser("noisy-embed", help="noisy frames near an embedded V_k(R^n)")
    g.add_argument("--N", type=_positive_int, required=True)
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--k", type=_positive_int, required=True)
    g.add_argument("--count", type=_nonneg_int, required=True)
    g.add_argument("--eps", type=_nonneg_float, default=0.0)
    g = gsub.add_parser("stimulus", help="tent-tuned population driven by a half-circle walk")
    g.add_argument("--neurons", type=_positive_int, default=100)
    g.add_argument("--steps", type=_positive_int, default=13000)
    g.add_argument("--step-std", type=_nonneg_float, default=0.01)
    g.add_argument("--centering", choices=["population", "temporal"], default="population")
    g = gsub.add_parser("mobius", help="lifted samples of the Moebius bundle")
    g.add_argument("--J", type=int, default=25)
    g.add_argument("--count", type=_nonneg_int, default=1000)
    g = gsub.add_parser("torus", help="lifted samples of the Whitney sum over the torus")
    g.add_argument("--J", type=int, default=10)
    g.add_argument("--count", type=_nonneg_int, default=1000)
    g.add_argument("--curve", type=int, nargs=2, metavar=("P", "Q"))
    for g in gsub.choices.values():
        g.add_argument("--seed", type=int, required=True)
        g.add_argument("--out", default="dataset.csv", help="dataset path; ground truth goes beside it")

    fit = sub.add_parser("fit", help="fit alpha_PCA and alpha_GD and project the data")
    fit.add_argument("dataset")
    fit.add_argument("--n", type=int, required=True)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--max-iters", type=_positive_int, default=1000)
    fit.add_argument("--grad-tol", type=_nonneg_float, default=1e-6)
    fit.add_argument("--initial-step", type=float, default=1.0)
    fit.add_argument("--pca-variant", choices=["eig", "concat-svd"], default="eig")
    fit.add_argument("--ransac", action="store_true", help="screen outliers before the PCA step")
    fit.add_argument("--keep-fraction", type=float, default=0.99)
    fit.add_argument("--outlier-threshold", type=float, default=3.0)
    fit.add_argument("--max-rounds", type=_positive_int, default=50)
    fit.add_argument("--report")
    fit.add_argument("--low-dim")

    proj = sub.add_parser("project", help="project a dataset with the alpha_GD of a report")
    proj.add_argument("dataset")
    proj.add_argument("--report", required=True)
    proj.add_argument("--out", required=True)

    ev = sub.add_parser("eval", help="evaluation metrics")
    esub = ev.add_subparsers(dest="kind", required=True)
    e = esub.add_parser("mse")
    e.add_argument("--report", required=True)
    e = esub.add_parser("variance-ratio")
    e.add_argument("--data", required=True)
    e.add_argument("--report", required=True)
    e = esub.add_parser("spectrum")
    e.add_argument("--data", required=True)
    e = esub.add_parser("landscape")
    e.add_argument("--data", required=True)
    e.add_argument("--report")
    e.add_argument("--alpha", help="generating alpha as a one-point dataset file")
    e.add_argument("--resolution", type=int, nargs=2, default=[73, 19], metavar=("THETA", "PHI"))
    e = esub.add_parser("path")
    e.add_argument("--low-dim", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--report", help="select the truth entries of the report's surviving points")
    e.add_argument("--sigma", type=_nonneg_float, default=100.0)
    e = esub.add_parser("kmeans")
    e.add_argument("--data", required=True)
    e.add_argument("--clusters", type=_positive_int, required=True)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--restarts", type=_positive_int, default=10)
    e = esub.add_parser("ari")
    e.add_argument("--a", required=True)
    e.add_argument("--b", required=True)
    for e in esub.choices.values():
        e.add_argument("--out", help="write here instead of stdout")

    for p in (fit, proj, *esub.choices.values()):
        p.add_argument("--renormalize", action="store_true", help="polar-project frames on load")

    rep = sub.add_parser("reproduce", help="run a scaled synthetic experiment end to end")
    rep.add_argument("experiment", choices=sorted(RUNNERS))
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--trials", type=_positive_int)
    rep.add_argument("--out")
    return parser


COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "project": cmd_project,
    "eval": cmd_eval,
    "reproduce": cmd_reproduce,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        return COMMANDS[args.command](args)
    except EmptySurvivorsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (DegenerateMeanError, DegenerateStepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (UsageError, PSCError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
