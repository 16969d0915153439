"""Artifact writers: CSV tables, JSON documents, SVG line plots and the run manifest.

Numbers are written with 17 significant digits so that identical runs give
byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

TRAJECTORY_SCHEMA = "trajectory-v1"
SNAPSHOT_SCHEMA = "snapshot-v1"


def fmt(x) -> str:
    x = float(x)
    if x == 0.0:
        return "0"  # folds -0.0 as well
    return format(x, ".17g")


def write_csv(path: Path, header: list, rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_json(path: Path, data: dict) -> Path:
    text = json.dumps(_jsonable(data), sort_keys=True, indent=2, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def trajectory_header(n: int, n_probes: int) -> list:
    return (["t"] + [f"q{k}" for k in range(n)]
            + ["kinetic", "potential", "total", "constraint_inf", "velocity_constraint_inf",
               "tip", "lambda_root"] + [f"probe{k}" for k in range(n_probes)])


def write_trajectory(path: Path, traj, probe_rows: np.ndarray | None = None) -> Path:
    q = traj.array("q")
    n = q.shape[1] if q.ndim == 2 else 0
    probes = np.zeros((len(traj), 0)) if probe_rows is None else q[:, : probe_rows.shape[1]] @ probe_rows.T
    cols = ["kinetic", "potential", "total", "constraint_inf", "velocity_constraint_inf", "tip", "lambda_root"]
    diag = np.column_stack([traj.array(c) for c in cols])
    rows = (np.concatenate([[t], qk, dk, pk]) for t, qk, dk, pk in zip(traj.times, q, diag, probes))
    return write_csv(path, trajectory_header(n, probes.shape[1]), rows)


def write_snapshot(path: Path, x, y, w) -> Path:
    """Row-major grid: header carries the y coordinates (beams: a single 'w' column)."""
    if y is None:
        return write_csv(path, ["x", "w"], zip(x, w))
    header = ["x\\y"] + [fmt(v) for v in y]
    return write_csv(path, header, (np.concatenate([[xi], row]) for xi, row in zip(x, w)))


# -- SVG ---------------------------------------------------------------------------

def _ticks(lo: float, hi: float) -> list:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / 4 for k in range(5)]


def write_svg(path: Path, x, series: dict, title: str, xlabel: str, ylabel: str) -> Path:
    """Line plot: one polyline per series, box axes with five ticks each."""
    W, H, ml, mr, mt, mb = 640, 400, 80, 20, 30, 50
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(v, dtype=float) for v in series.values()]
    x0, x1 = (float(x.min()), float(x.max())) if x.size else (0.0, 1.0)
    y0 = min((float(v.min()) for v in ys if v.size), default=0.0)
    y1 = max((float(v.max()) for v in ys if v.size), default=1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        pad = abs(y0) * 1e-3 or 1.0
        y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return ml + (v - x0) / (x1 - x0) * (W - ml - mr)

    def py(v):
        return H - mb - (v - y0) / (y1 - y0) * (H - mt - mb)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}">',
           f'<rect x="{ml}" y="{mt}" width="{W - ml - mr}" height="{H - mt - mb}" fill="none" stroke="black"/>',
           f'<text x="{W / 2:.1f}" y="18" text-anchor="middle" font-size="14">{title}</text>',
           f'<text x="{W / 2:.1f}" y="{H - 8}" text-anchor="middle" font-size="12">{xlabel}</text>',
           f'<text x="14" y="{H / 2:.1f}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 14 {H / 2:.1f})">{ylabel}</text>']
    for t in _ticks(x0, x1):
        out.append(f'<text x="{px(t):.2f}" y="{H - mb + 16}" text-anchor="middle" font-size="10">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{ml - 4}" y="{py(t) + 3:.2f}" text-anchor="end" font-size="10">{t:.6g}</text>')
    for k, (name, v) in enumerate(zip(series, ys)):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, v))
        color = colors[k % len(colors)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        out.append(f'<text x="{W - mr - 4}" y="{mt + 14 + 14 * k}" text-anchor="end" font-size="11" '
                   f'fill="{color}">{name}</text>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def write_manifest(path: Path, config_hash: str, version: str, wall_clock: float, checks: dict,
                   artifacts: list, status: str = "complete", error: str | None = None) -> Path:
    data = {"config_hash": config_hash, "code_version": version, "wall_clock_seconds": wall_clock,
            "status": status, "checks": {k: ("pass" if v else "fail") for k, v in sorted(checks.items())},
            "artifacts": {Path(p).name: sha256_file(p) for p in sorted(artifacts)}}
    if error is not None:
        data["error"] = error
    if path.exists():
        raise FileExistsError(f"manifest {path} already written for this run")
    return write_json(path, data)
