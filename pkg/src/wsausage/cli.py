"""Command-line entry point.

Each subcommand runs one experiment and writes JSONL, CSV and SVG files into
the output directory.  Settings come from defaults, then an optional
key-value config file (``[common]`` plus one section per subcommand), then
command-line flags.

Exit status: 0 success, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import asymptotics as A
from . import records as R
from .engines import RngSpec, sample_path
from .experiments import (MODELS, convergence_excess, default_model,
                          fit_limit, fluctuation_experiment, green_comparison,
                          lil_trace, run_ensemble, verify_sandwich)
from .parallel import WORKERS_ENV
from .sausage import default_skip
from .space import RadialMetricProfile, SpaceDescriptor

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

SUBCOMMANDS = ("constants", "simulate", "fit", "verify-sandwich", "fluctuation",
               "lil", "green-compare", "excess", "plot")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def _floats(s) -> list[float]:
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    return [float(v) for v in str(s).replace(" ", "").split(",") if v]


def _bool(s) -> bool:
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


# name, parser, default, help, subcommands (None = every experiment command)
_RUN = ("simulate", "verify-sandwich", "fluctuation", "lil", "green-compare", "excess")
OPTIONS = [
    ("out", str, "results", "output directory for JSONL/CSV/SVG files (path)", None),
    ("seed", int, 0, "master seed (64-bit unsigned integer)", _RUN),
    ("workers", int, None, f"worker processes (count); default ${WORKERS_ENV}, "
                           "else the CPU count", _RUN),
    ("space", str, "euclid", "space: euclid | radial | gasket", ("simulate", "lil",
                                                              "verify-sandwich")),
    ("dim", int, 3, "spatial dimension (integer)", ("constants", "simulate",
                                                    "verify-sandwich", "fluctuation",
                                                    "green-compare", "excess", "lil")),
    ("breakpoints", _floats, [], "comma-separated connector radii R_1 < R_2 < ... "
                                 "(length units)", ("simulate", "verify-sandwich",
                                                    "fluctuation", "green-compare",
                                                    "excess", "lil")),
    ("start_value", float, 1.0, "metric factor G on [0, R_1 - 1) (dimensionless)",
     ("simulate", "verify-sandwich", "fluctuation", "green-compare", "excess", "lil")),
    ("plateau", float, 4.0, "high plateau value of G (dimensionless)",
     ("simulate", "verify-sandwich", "fluctuation", "green-compare", "excess", "lil")),
    ("graph_depth", int, 40, "gasket address bound: a + b <= 2**depth (integer)",
     ("simulate", "lil")),
    ("eps", float, 1.0, "sausage radius (length units)", ("constants", "simulate",
                                                          "verify-sandwich", "fluctuation",
                                                          "excess", "lil")),
    ("t", _floats, [10.0, 20.0, 40.0, 80.0], "comma-separated times (time units; "
                                             "steps on the gasket)",
     ("simulate", "verify-sandwich", "fluctuation", "excess")),
    ("T", float, 5.0, "extra time window T of the sandwich check (time units)",
     ("verify-sandwich",)),
    ("paths", int, 2000, "number of sample paths (count)", ("simulate", "verify-sandwich",
                                                            "fluctuation", "green-compare",
                                                            "excess")),
    ("dt", float, None, "time step (time units); default 1e-3 * eps^2 "
                        "(1e-2 for green-compare)", _RUN),
    ("h", float, None, "grid cell size (length units); default eps/8",
     ("simulate", "fluctuation", "excess", "lil")),
    ("skip", float, None, "stamp-skip distance (length units); default h/8",
     ("simulate", "fluctuation", "excess")),
    ("richardson", _bool, False, "step-bias correction V + (V - V_2dt)/(sqrt(2) - 1) "
                                 "from the same path (flag)", ("simulate", "excess")),
    ("strict_hitting", _bool, False, "hitting times count only t > 0 (flag)",
     ("verify-sandwich",)),
    ("dump_paths", _bool, False, "write the first sampled path as CSV rows "
                                 "(t, x_1..x_d) (flag)", ("simulate",)),
    ("input", str, None, "input JSONL file (path)", ("fit", "plot")),
    ("model", str, None, "fit model: " + " | ".join(MODELS) + "; default by dimension",
     ("fit", "fluctuation")),
    ("x", _floats, None, "start point x, comma-separated (length units); "
                         "default origin", ("verify-sandwich",)),
    ("y", _floats, None, "ball center y, comma-separated (length units); "
                         "default (1.5 eps, 0, ...)", ("verify-sandwich",)),
    ("a", float, 0.5, "inner ball fraction a in (0, 1) (dimensionless)",
     ("verify-sandwich",)),
    ("sphere_points", int, 32, "sphere design size for the inf/sup (count)",
     ("verify-sandwich",)),
    ("horizon", float, None, "path horizon (time units; steps on the gasket); "
                             "default 1e6 for lil, 100 for green-compare",
     ("lil", "green-compare")),
    ("points", int, 60, "number of log-spaced trace times (count)", ("lil",)),
    ("sweep", _floats, [5.0, 10.0, 20.0], "comma-separated |y| values (length units)",
     ("green-compare",)),
    ("eps1", float, 0.1, "inner annulus radius around y (length units)",
     ("green-compare",)),
    ("eps2", float, 1.9, "outer annulus radius around y (length units)",
     ("green-compare",)),
    ("ball", float, None, "occupation ball radius around z (length units); "
                          "default min(0.9 eps2, room to the modified region)",
     ("green-compare",)),
]
_OPT = {o[0]: o for o in OPTIONS}


@dataclass
class RunConfig:
    experiment: str
    values: dict = field(default_factory=dict)

    def __getattr__(self, name):
        v = self.__dict__.get("values", {})
        if name in v:
            return v[name]
        raise AttributeError(name)

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, **self.values}

    def space_descriptor(self) -> SpaceDescriptor:
        kind = self.values.get("space", "euclid")
        if self.experiment in ("fluctuation", "green-compare", "excess"):
            kind = "radial" if self.values.get("breakpoints") else "euclid"
        if kind == "euclid":
            if self.values.get("start_value", 1.0) != 1.0:
                return SpaceDescriptor.radial(self.dim, self.profile())
            return SpaceDescriptor.euclidean(self.dim)
        if kind == "radial":
            return SpaceDescriptor.radial(self.dim, self.profile())
        return SpaceDescriptor.gasket(self.values.get("graph_depth", 40))

    def profile(self) -> RadialMetricProfile:
        return RadialMetricProfile(tuple(self.values.get("breakpoints", [])),
                                   self.values.get("start_value", 1.0),
                                   self.values.get("plateau", 4.0))


def options_for(cmd: str) -> list[tuple]:
    return [o for o in OPTIONS if o[4] is None or cmd in o[4]]


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wsausage", description="Wiener-sausage Monte Carlo experiments.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    docs = {
        "constants": "print capacity, Green value and limit ratio as CSV",
        "simulate": "ensemble of nested sausage volumes",
        "fit": "extrapolate the per-time constant from a JSONL result",
        "verify-sandwich": "Monte Carlo check of the hitting-time sandwich",
        "fluctuation": "per-time constants for plateau-1, plateau-4 and shell metrics",
        "lil": "one long path scaled by both LIL normalizers",
        "green-compare": "Green function of a bounded modification against R^d",
        "excess": "mean volume minus t times capacity (dim >= 6)",
        "plot": "SVG line charts from a JSONL file",
    }
    for cmd in SUBCOMMANDS:
        sp = sub.add_parser(cmd, help=docs[cmd], description=docs[cmd])
        sp.add_argument("--config", default=argparse.SUPPRESS,
                        help="key-value config file with [common] and per-command "
                             "sections (path)")
        for name, conv, default, hlp, _ in options_for(cmd):
            shown = ",".join(f"{v:g}" for v in default) if isinstance(default, list) \
                else default
            dflt = "" if default is None or shown == "" else f" [default: {shown}]"
            if conv is _bool:
                sp.add_argument(_flag(name), dest=name, action="store_true",
                                default=argparse.SUPPRESS, help=hlp)
            else:
                sp.add_argument(_flag(name), dest=name, default=argparse.SUPPRESS,
                                metavar=name.upper(), help=hlp + dflt)
    return p


def _convert(cmd: str, key: str, raw) -> Any:
    key = key.replace("-", "_")
    if key not in _OPT or (_OPT[key][4] is not None and cmd not in _OPT[key][4]):
        raise ConfigError(f"unknown key {key!r} for {cmd}")
    conv = _OPT[key][1]
    try:
        return conv(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from None


def _read_file(cmd: str, fname: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(fname) as fh:
            cp.read_file(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config file {fname!r}: {e}") from None
    except configparser.Error as e:
        raise ConfigError(f"malformed config file: {e}") from None
    out = {}
    for sec in cp.sections():
        if sec not in ("common",) + SUBCOMMANDS:
            raise ConfigError(f"unknown section [{sec}]")
    for sec in ("common", cmd):
        if cp.has_section(sec):
            for k, v in cp.items(sec):
                kk = k.replace("-", "_")
                if sec == "common" and kk in _OPT and _OPT[kk][4] is not None \
                        and cmd not in _OPT[kk][4]:
                    continue        # common keys only apply where meaningful
                out[kk] = _convert(cmd, kk, v)
    return out


def parse_config(argv: Optional[list[str]] = None) -> RunConfig:
    """Parse flags (and an optional config file) into a validated RunConfig."""
    ns = build_parser().parse_args(argv)
    cmd = ns.command
    args = vars(ns)
    vals = {name: default for name, _, default, _, _ in options_for(cmd)}
    if "config" in args:
        vals.update(_read_file(cmd, args["config"]))
    for k, v in args.items():
        if k in ("command", "config"):
            continue
        vals[k] = v if isinstance(v, bool) else _convert(cmd, k, v)
    cfg = RunConfig(cmd, vals)
    validate(cfg)
    return cfg


def _need(cond: bool, key: str, msg: str):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def validate(cfg: RunConfig) -> None:
    v = cfg.values
    cmd = cfg.experiment
    if "eps" in v:
        _need(v["eps"] > 0, "eps", "must be positive")
    if "dim" in v:
        _need(v["dim"] >= 1, "dim", "must be >= 1")
    if "space" in v:
        _need(v["space"] in ("euclid", "radial", "gasket"), "space",
              "must be euclid, radial or gasket")
        if v["space"] == "gasket":
            v["dim"] = 2
    if "paths" in v:
        _need(v["paths"] >= 2, "paths", "must be >= 2")
    if "seed" in v:
        _need(0 <= v["seed"] < 2 ** 64, "seed", "must be a 64-bit unsigned integer")
    if v.get("workers") is not None:
        _need(v["workers"] >= 1, "workers", "must be >= 1")
    if "t" in v:
        t = v["t"]
        _need(len(t) > 0, "t", "needs at least one time")
        _need(all(x > 0 for x in t), "t", "times must be positive")
        _need(all(b > a for a, b in zip(t, t[1:])), "t", "times must be ascending")
    if "eps" in v and "dt" in v:
        if v["dt"] is None:
            v["dt"] = 1e-3 * v["eps"] ** 2
        _need(v["dt"] > 0, "dt", "must be positive")
    if "h" in v and "eps" in v:
        if v["h"] is None:
            v["h"] = v["eps"] / 8.0
        _need(0 < v["h"] <= v["eps"] / 4.0, "h", "must satisfy 0 < h <= eps/4")
        if "skip" in v:
            if v["skip"] is None:
                v["skip"] = default_skip(v["h"])
            _need(0 <= v["skip"] <= v["h"], "skip", "must satisfy 0 <= skip <= h")
    if v.get("skip") is not None:
        _need(v["skip"] >= 0, "skip", "must be >= 0")
    if v.get("model") is not None:
        _need(v["model"] in MODELS, "model", "must be one of " + ", ".join(MODELS))
    if "breakpoints" in v:
        try:
            RadialMetricProfile(tuple(v["breakpoints"]), v.get("start_value", 1.0),
                                v.get("plateau", 4.0))
        except ValueError as e:
            raise ConfigError(f"breakpoints: {e}") from None
    if cmd in ("fit", "plot"):
        _need(v.get("input") is not None, "input", "is required")
    if cmd == "verify-sandwich":
        _need(0 < v["a"] < 1, "a", "must lie in (0, 1)")
        _need(v["T"] > 0, "T", "must be positive")
        d = v["dim"]
        if v["x"] is None:
            v["x"] = [0.0] * d
        if v["y"] is None:
            v["y"] = [1.5 * v["eps"]] + [0.0] * (d - 1)
        _need(len(v["x"]) == d, "x", "must have dim coordinates")
        _need(len(v["y"]) == d, "y", "must have dim coordinates")
        sep = math.dist(v["x"], v["y"])
        _need(sep > v["eps"], "y", "need |x - y| > eps")
    if cmd in ("fluctuation", "green-compare"):
        _need(v["dim"] >= 3, "dim", "must be >= 3")
    if cmd == "excess":
        _need(v["dim"] >= 6, "dim", "must be >= 6")
    if cmd == "green-compare":
        _need(0 < v["eps1"] <= v["eps2"], "eps1", "need 0 < eps1 <= eps2")
        _need(len(v["sweep"]) > 0, "sweep", "needs at least one distance")
        if v["horizon"] is None:
            v["horizon"] = 100.0
        if v["dt"] is None:
            v["dt"] = 1e-2      # (connector width / 10)^2
        _need(v["dt"] > 0, "dt", "must be positive")
    if cmd == "lil":
        if v["horizon"] is None:
            v["horizon"] = 1e6
        _need(v["horizon"] >= math.e ** 2, "horizon", "must be >= e^2")


# ---------------------------------------------------------------------------
# dispatch

def _outdir(cfg: RunConfig) -> Path:
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _cmd_constants(cfg: RunConfig) -> list[dict]:
    d, eps = cfg.dim, cfg.eps
    row = {"dim": d, "eps": eps}
    if d >= 3:
        row["capacity"] = A.capacity_ball(d, eps)
        row["green"] = A.green_bm(d, eps)
    else:
        row["capacity"] = ""
        row["green"] = ""
    row["scaled_ratio"] = A.scaled_limit_ratio(d) if d >= 2 else ""
    row["conformal_ratio"] = A.conformal_limit_ratio(d) if d >= 2 else ""
    return [row]


def _print_csv(rows: list[dict]) -> None:
    keys = list(rows[0])
    print(",".join(keys))
    for r in rows:
        print(",".join(repr(r[k]) if isinstance(r[k], float) else str(r[k]) for k in keys))


def _simulate(cfg: RunConfig, out: Path, cid: str) -> list[dict]:
    space = cfg.space_descriptor()
    res = run_ensemble(space, cfg.eps, cfg.t, cfg.paths, cfg.dt, cfg.h, cfg.seed,
                       cfg.workers, cfg.skip, richardson=cfg.richardson)
    if cfg.dump_paths:
        p = sample_path(space, cfg.t[-1], cfg.dt, RngSpec(cfg.seed, 0))
        p.to_csv(out / "path_0.csv")
    recs = R.ensemble_records(res, cid)
    xs = res.times
    svg = R.svg_line_chart({"mean / t": (xs, res.mean / xs)}, "t (time units)",
                           "mean volume / t (volume per time)",
                           f"{space.variant} d={space.dim} eps={cfg.eps:g}",
                           logx=True, bands={"mean / t": res.stderr / xs})
    R.write_svg(out / "simulate.svg", svg)
    return recs


def _fit(cfg: RunConfig, out: Path) -> list[dict]:
    recs = R.read_jsonl(cfg.input)
    ens = R.ensembles_from_records(recs)
    if not ens:
        raise ValueError("input holds no ensemble records")
    new = []
    for e in ens:
        f = fit_limit(e, cfg.model or default_model(e.space.dim), use_samples=False)
        new.append(R.fit_record(f, e.experiment))
    R.write_jsonl(cfg.input, new, append=True)
    return new


def _sandwich(cfg: RunConfig, out: Path, cid: str) -> list[dict]:
    space = cfg.space_descriptor()
    rep = verify_sandwich(space, cfg.x, cfg.y, cfg.eps, cfg.a, cfg.t[0], cfg.T,
                          cfg.paths, cfg.dt, cfg.seed, cfg.sphere_points, cfg.workers,
                          strict=cfg.strict_hitting)
    base = {"experiment": "verify-sandwich", "space": space.describe(), "eps": cfg.eps,
            "a": cfg.a, "t": cfg.t[0], "T": cfg.T, "N": cfg.paths, "dt": cfg.dt,
            "seed": cfg.seed, "config_id": cid, "p_hit": rep.p_hit,
            "p_hit_se": rep.p_hit_se}
    R.write_svg(out / "verify-sandwich.svg", R.svg_line_chart(
        {"upper margin": (np.array([1.0]), np.array([rep.upper_margin])),
         "lower margin": (np.array([2.0]), np.array([rep.lower_margin])),
         "zero": (np.array([0.5, 2.5]), np.zeros(2))},
        "inequality (1 = upper, 2 = lower)", "LHS - RHS (time units)",
        "sandwich margins with 1 sigma bands",
        bands={"upper margin": np.array([rep.upper_sigma]),
               "lower margin": np.array([rep.lower_sigma])}))
    return [dict(base, inequality="upper", margin=rep.upper_margin,
                 sigma=rep.upper_sigma, label=rep.upper_label),
            dict(base, inequality="lower", margin=rep.lower_margin,
                 sigma=rep.lower_sigma, label=rep.lower_label)]


def _fluctuation(cfg: RunConfig, out: Path, cid: str) -> list[dict]:
    prof = cfg.profile() if cfg.breakpoints else None
    res = fluctuation_experiment(cfg.dim, prof, cfg.eps, cfg.t, cfg.paths, cfg.dt,
                                 cfg.h, cfg.seed, cfg.workers,
                                 cfg.model or "inverse-sqrt")
    recs = []
    for name, e in res.ensembles.items():
        e.experiment = f"fluctuation-{name}"
        recs += R.ensemble_records(e, cid)
        recs.append(dict(R.fit_record(res.fits[name], e.experiment), config_id=cid))
    recs.append({"experiment": "fluctuation-ratio", "ratio": res.ratio,
                 "ratio_stderr": res.ratio_stderr,
                 "scaled_limit_ratio": A.scaled_limit_ratio(cfg.dim),
                 "conformal_limit_ratio": A.conformal_limit_ratio(cfg.dim, cfg.plateau),
                 "config_id": cid})
    series = {k: (res.times, v[0]) for k, v in res.curves.items()}
    bands = {k: v[1] for k, v in res.curves.items()}
    R.write_svg(out / "fluctuation.svg",
                R.svg_line_chart(series, "t (time units)", "mean volume / t",
                                 f"per-time constants, d={cfg.dim}", logx=True,
                                 bands=bands))
    return recs


def _lil(cfg: RunConfig, out: Path, cid: str) -> list[dict]:
    space = cfg.space_descriptor()
    if space.is_graph:
        V, phi = A.gasket_scaling()
    else:
        V, phi = A.euclid_scaling(space.dim)
    tr = lil_trace(space, V, phi, cfg.eps, cfg.horizon, cfg.seed, cfg.points,
                   cfg.dt, cfg.h)
    recs = [{"experiment": "lil", "space": space.describe(), "t": float(t),
             "raw": float(r), "sup_normalizer": float(a), "inf_normalizer": float(b),
             "seed": cfg.seed, "config_id": cid}
            for t, r, a, b in zip(tr.times, tr.raw, tr.sup_normalizer, tr.inf_normalizer)]
    R.write_svg(out / "lil.svg", R.svg_line_chart(
        {"V / sup-normalizer": (tr.times, tr.scaled_sup),
         "V / inf-normalizer": (tr.times, tr.scaled_inf)},
        "t (time units or steps)", "scaled volume (dimensionless)", "LIL trace",
        logx=True))
    return recs


def _green(cfg: RunConfig, out: Path, cid: str) -> list[dict]:
    prof = cfg.profile()
    rows = green_comparison(prof, cfg.dim, cfg.sweep, cfg.eps1, cfg.eps2, cfg.paths,
                            cfg.horizon, cfg.dt, cfg.seed, cfg.ball, cfg.workers)
    recs = [{"experiment": "green-compare", "y_norm": r.y_norm, "separation": r.separation,
             "ball": r.ball, "green_bm": r.green_bm, "green_raw": r.green_raw,
             "green_raw_se": r.green_raw_se, "diff": r.diff, "diff_se": r.diff_se,
             "hit_fraction": r.hit_fraction, "N": cfg.paths, "dt": cfg.dt,
             "horizon": cfg.horizon, "seed": cfg.seed, "config_id": cid} for r in rows]
    xs = np.array([r.y_norm for r in rows])
    R.write_svg(out / "green-compare.svg", R.svg_line_chart(
        {"|G^M - G^BM|": (xs, np.abs([r.diff for r in rows]))},
        "|y| (length units)", "Green difference (per volume per time)",
        "Green function difference", bands={"|G^M - G^BM|": np.array([r.diff_se for r in rows])}))
    return recs


def _excess(cfg: RunConfig, out: Path, cid: str) -> list[dict]:
    prof = cfg.profile() if cfg.breakpoints else None
    ex = convergence_excess(cfg.dim, prof, cfg.eps, cfg.t, cfg.paths, cfg.dt, cfg.h,
                            cfg.seed, cfg.workers, cfg.skip, cfg.richardson)
    recs = [{"experiment": "excess", "t": float(t), "excess": float(e), "stderr": float(s),
             "capacity": ex.capacity, "N": cfg.paths, "dt": cfg.dt, "h": cfg.h,
             "richardson": cfg.richardson, "seed": cfg.seed, "config_id": cid}
            for t, e, s in zip(ex.times, ex.excess, ex.stderr)]
    recs.append({"experiment": "excess-stabilized", "stabilized": ex.stabilized(),
                 "config_id": cid})
    R.write_svg(out / "excess.svg", R.svg_line_chart(
        {"excess": (ex.times, ex.excess)}, "t (time units)", "mean V - t Cap (volume)",
        f"excess, d={cfg.dim}", logx=True, bands={"excess": ex.stderr}))
    return recs


def _plot(cfg: RunConfig, out: Path) -> list[dict]:
    recs = R.read_jsonl(cfg.input)
    ens = R.ensembles_from_records(recs)
    if not ens:
        raise ValueError("input holds no ensemble records")
    for k, e in enumerate(ens):
        R.write_svg(out / f"plot_{k}_{e.experiment}.svg", R.svg_line_chart(
            {e.experiment: (e.times, e.mean / e.times)}, "t (time units)",
            "mean volume / t", f"{e.experiment} (N={e.n_paths})", logx=True,
            bands={e.experiment: e.stderr / e.times}))
    return []


def dispatch(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    cid = R.config_id({k: v for k, v in cfg.to_dict().items()
                       if k not in ("workers", "out")})
    cmd = cfg.experiment
    if cmd == "constants":
        rows = _cmd_constants(cfg)
        R.write_csv(out / "constants.csv", rows)
        _print_csv(rows)
        return EXIT_OK
    if cmd == "fit":
        recs = _fit(cfg, out)
        for r in recs:
            print(json.dumps(r, sort_keys=True))
        return EXIT_OK
    if cmd == "plot":
        _plot(cfg, out)
        return EXIT_OK
    run = {"simulate": _simulate, "verify-sandwich": _sandwich,
           "fluctuation": _fluctuation, "lil": _lil, "green-compare": _green,
           "excess": _excess}[cmd]
    recs = run(cfg, out, cid)
    stem = cmd
    R.write_jsonl(out / f"{stem}.jsonl", recs)
    R.write_csv(out / f"{stem}.csv", recs)
    print(f"wrote {len(recs)} records to {out / (stem + '.jsonl')}")
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as e:
        print(f"wsausage: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return dispatch(cfg)
    except (ValueError, ArithmeticError, OSError, RuntimeError) as e:
        print(f"wsausage: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
