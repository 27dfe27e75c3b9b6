"""Persistence: JSONL records, CSV mirrors and standalone SVG line charts."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .experiments import EnsembleResult, FitResult
from .space import SpaceDescriptor

ENSEMBLE_FIELDS = ("experiment", "space", "eps", "t", "mean", "stderr", "N", "dt",
                   "h", "seed", "config_id", "wall_clock")


def config_id(config: dict) -> str:
    """Short stable digest of a configuration mapping."""
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha1(blob).hexdigest()[:12]


def ensemble_records(r: EnsembleResult, cid: str = "") -> list[dict]:
    out = []
    for t, m, s in zip(r.times, r.mean, r.stderr):
        out.append({"experiment": r.experiment, "space": r.space.describe(),
                    "eps": r.eps, "t": float(t), "mean": float(m), "stderr": float(s),
                    "N": r.n_paths, "dt": r.dt, "h": r.h, "seed": r.seed,
                    "richardson": r.richardson, "config_id": cid,
                    "wall_clock": r.wall_clock})
    return out


def ensembles_from_records(records: Iterable[dict]) -> list[EnsembleResult]:
    """Group time-point records back into results (one per experiment and
    config id, in first-seen order)."""
    groups: dict = {}
    for rec in records:
        if "t" not in rec or "mean" not in rec:
            continue
        key = (rec["experiment"], rec.get("config_id", ""), rec["seed"],
               json.dumps(rec["space"], sort_keys=True), rec["eps"])
        groups.setdefault(key, []).append(rec)
    out = []
    for recs in groups.values():
        r0 = recs[0]
        out.append(EnsembleResult(
            space=SpaceDescriptor.from_dict(r0["space"]), eps=r0["eps"],
            times=np.array([r["t"] for r in recs]),
            mean=np.array([r["mean"] for r in recs]),
            stderr=np.array([r["stderr"] for r in recs]),
            n_paths=r0["N"], seed=r0["seed"], dt=r0["dt"], h=r0["h"],
            wall_clock=r0.get("wall_clock", 0.0), experiment=r0["experiment"],
            richardson=r0.get("richardson", False)))
    return out


def fit_record(f: FitResult, source: str = "") -> dict:
    return {"experiment": "fit", "model": f.model, "a": f.a, "a_stderr": f.a_stderr,
            "b": f.b, "c": f.c, "residual": f.residual, "cov": f.cov.tolist(),
            "times": f.times.tolist(), "source": source}


def fit_from_record(rec: dict) -> FitResult:
    return FitResult(rec["model"], rec["a"], rec["b"], rec["residual"],
                     np.array(rec["cov"]), np.array(rec["times"]), rec.get("c"))


def write_jsonl(path, records: Iterable[dict], append: bool = False) -> None:
    with open(path, "a" if append else "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_jsonl(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _flat(v):
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    if isinstance(v, (list, tuple)):
        return json.dumps(v)
    return v


def write_csv(path, records: Sequence[dict], fields: Optional[Sequence[str]] = None) -> None:
    if fields is None:
        fields = []
        for rec in records:
            fields += [k for k in rec if k not in fields]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(fields)
        for rec in records:
            w.writerow([_flat(rec.get(k, "")) for k in fields])


# ---------------------------------------------------------------------------
# SVG

def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (step * m) <= n:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def svg_line_chart(series: dict, xlabel: str, ylabel: str, title: str = "",
                   logx: bool = False, width: int = 640, height: int = 420,
                   bands: Optional[dict] = None) -> str:
    """One chart: ``series`` maps a label to (x, y); ``bands`` optionally maps
    the same labels to y half-widths drawn as error bars."""
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    left, right, top, bottom = 70, 20, 40, 55
    xs = np.concatenate([np.asarray(v[0], float) for v in series.values()])
    ys = np.concatenate([np.asarray(v[1], float) for v in series.values()])
    if bands:
        for k, e in bands.items():
            y = np.asarray(series[k][1], float)
            ys = np.concatenate([ys, y - e, y + e])
    fx = np.log10 if logx else (lambda v: np.asarray(v, float))
    x0, x1 = float(np.min(fx(xs))), float(np.max(fx(xs)))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    if x1 == x0:
        x1 = x0 + 1.0
    pad = 0.05 * (y1 - y0 or 1.0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - left - right, height - top - bottom

    def px(v):
        return left + (fx(v) - x0) / (x1 - x0) * pw

    def py(v):
        return top + (y1 - np.asarray(v, float)) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">'
           f'{escape(title)}</text>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for tv in _ticks(x0, x1):
        X = left + (tv - x0) / (x1 - x0) * pw
        lab = f"{10 ** tv:g}" if logx else f"{tv:g}"
        out.append(f'<line x1="{X:.1f}" y1="{top + ph}" x2="{X:.1f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.1f}" y="{top + ph + 18}" text-anchor="middle">{lab}</text>')
    for tv in _ticks(y0, y1):
        Y = float(py(tv))
        out.append(f'<line x1="{left - 5}" y1="{Y:.1f}" x2="{left}" y2="{Y:.1f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.1f}" text-anchor="end">{tv:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2})">{escape(ylabel)}</text>')
    for k, (name, (x, y)) in enumerate(series.items()):
        c = colors[k % len(colors)]
        X, Y = px(np.asarray(x, float)), py(y)
        pts = " ".join(f"{a:.1f},{b:.1f}" for a, b in zip(X, Y))
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        if bands and name in bands:
            e = np.broadcast_to(np.asarray(bands[name], float), np.shape(y))
            for a, yv, ev in zip(X, np.asarray(y, float), e):
                out.append(f'<line x1="{a:.1f}" y1="{float(py(yv - ev)):.1f}" x2="{a:.1f}" '
                           f'y2="{float(py(yv + ev)):.1f}" stroke="{c}"/>')
        out.append(f'<text x="{left + pw - 8}" y="{top + 16 + 16 * k}" text-anchor="end" '
                   f'fill="{c}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, svg: str) -> None:
    Path(path).write_text(svg)
