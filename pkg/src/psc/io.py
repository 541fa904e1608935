"""Dataset and report files.

Dataset files start with a header ``# psc-dataset v1 N=<int> k=<int> count=<int>``
(plus `` labels=1`` when a label column is present) followed by one CSV row per
frame holding its N*k entries in row-major order. Reports are JSON. Every writer
goes through a temporary file and an atomic rename.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .errors import PSCError
from .linalg import polar_decompose
from .pipeline import FitReport
from .stiefel import FrameDataset

HEADER_RE = re.compile(r"^# psc-dataset v1 N=(\d+) k=(\d+) count=(\d+)( labels=1)?$")


class FileFormatError(PSCError, ValueError):
    pass


def atomic_write_text(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(x: float) -> str:
    # 17 significant digits reproduce every float64 exactly
    return "%.17g" % x


def dumps_dataset(data: FrameDataset) -> str:
    m, N, k = data.points.shape
    header = f"# psc-dataset v1 N={N} k={k} count={m}"
    if data.labels is not None:
        header += " labels=1"
    lines = [header]
    flat = data.points.reshape(m, N * k)
    for i in range(m):
        row = [format_float(v) for v in flat[i]]
        if data.labels is not None:
            row.append(str(int(data.labels[i])))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_dataset(path, data: FrameDataset):
    atomic_write_text(path, dumps_dataset(data))


def loads_dataset(text: str, renormalize: bool = False, source: str = "") -> FrameDataset:
    lines = text.splitlines()
    if not lines:
        raise FileFormatError("empty dataset file")
    match = HEADER_RE.match(lines[0].strip())
    if match is None:
        raise FileFormatError(f"bad header line: {lines[0]!r}")
    N, k, count = (int(g) for g in match.groups()[:3])
    has_labels = match.group(4) is not None
    if N < 1 or k < 1 or k > N:
        raise FileFormatError(f"header dimensions must satisfy 1 <= k <= N, got N={N}, k={k}")
    rows = [ln for ln in lines[1:] if ln.strip()]
    if len(rows) != count:
        raise FileFormatError(f"header says count={count} but file has {len(rows)} rows")
    width = N * k + has_labels
    values = np.empty((count, N * k))
    labels = np.empty(count, dtype=np.int64) if has_labels else None
    for i, row in enumerate(rows):
        fields = row.split(",")
        if len(fields) != width:
            raise FileFormatError(f"row {i} has {len(fields)} fields, expected {width}")
        try:
            values[i] = [float(f) for f in fields[: N * k]]
            if has_labels:
                labels[i] = int(fields[-1])
        except ValueError as exc:
            raise FileFormatError(f"row {i}: {exc}") from None
    if not np.all(np.isfinite(values)):
        raise FileFormatError("dataset has non-finite entries")
    points = values.reshape(count, N, k)
    if renormalize and count:
        points = np.stack([polar_decompose(p).u for p in points])
    return FrameDataset(points, labels=labels, source=source)


def read_dataset(path, renormalize: bool = False) -> FrameDataset:
    path = Path(path)
    return loads_dataset(path.read_text(), renormalize=renormalize, source=str(path))


def write_column_csv(path, values, header: str | None = None):
    """One value per line (or comma-separated columns for a 2-D array)."""
    arr = np.asarray(values)
    if arr.ndim == 1:
        arr = arr[:, None]
    fmt = (lambda v: str(int(v))) if np.issubdtype(arr.dtype, np.integer) else format_float
    lines = [] if header is None else [header]
    lines += [",".join(fmt(v) for v in row) for row in arr]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_column_csv(path, dtype=float) -> np.ndarray:
    rows = []
    for ln in Path(path).read_text().splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        try:
            rows.append([dtype(f) for f in ln.split(",")])
        except ValueError:
            if not rows:  # tolerate a single header line
                continue
            raise FileFormatError(f"cannot parse {ln!r} in {path}") from None
    arr = np.array(rows, dtype=dtype)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    return arr


# ---------------------------------------------------------------------------
# reports


def report_to_dict(report: FitReport) -> dict:
    """JSON-ready view of a report. Timing is left out so reruns are byte-identical."""
    return {
        "format": "psc-report v1",
        "N": report.N,
        "n": report.n,
        "k": report.k,
        "seed": report.seed,
        "config": report.config,
        "status": report.status,
        "mse": report.mse,
        "cost_pca": report.cost_pca,
        "cost_gd": report.cost_gd,
        "cost_trace": [list(r) for r in report.cost_trace],
        "surviving": report.surviving.tolist(),
        "removed_ransac": report.removed_ransac.tolist(),
        "removed_pca": report.removed_pca.tolist(),
        "removed_gd": report.removed_gd.tolist(),
        "residuals": report.outcomes.residuals.tolist(),
        "alpha_pca": report.alpha_pca.tolist(),
        "alpha_gd": report.alpha_gd.tolist(),
        "warnings": list(report.warnings),
    }


def dumps_report(report: FitReport | dict) -> str:
    d = report_to_dict(report) if isinstance(report, FitReport) else report
    # json renders floats with repr, the shortest string that parses back to the same double
    return json.dumps(d, indent=1, allow_nan=False) + "\n"


def write_report(path, report: FitReport | dict):
    atomic_write_text(path, dumps_report(report))


def read_report(path) -> dict:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: {exc}") from None
    if not isinstance(d, dict) or d.get("format") != "psc-report v1":
        raise FileFormatError(f"{path} is not a psc-report v1 file")
    return d


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=1, allow_nan=False) + "\n")
