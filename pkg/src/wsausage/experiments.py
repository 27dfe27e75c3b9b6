"""Monte Carlo ensembles, limit extrapolation and the verification
experiments built on them.

Every experiment is a pure function of its arguments and seed: path ``i``
always draws from ``RngSpec(seed, i)``, and reductions run over the full
per-path table in index order, so the worker count never changes a number.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .asymptotics import (ball_volume, capacity_ball, green_bm, lil_normalizers)
from .engines import RngSpec, SampledPath, sample_gasket_walk, sample_path
from .parallel import map_indices
from .sausage import range_curve, sausage_volumes
from .space import (GasketGraph, RadialMetricProfile, ScalingFunction,
                    SpaceDescriptor)

MODELS = ("inverse-sqrt", "inverse-log", "power-law", "inverse-sqrt-inverse")


# ---------------------------------------------------------------------------
# ensembles

@dataclass
class EnsembleResult:
    """Per-time mean and standard error of sausage volumes over N paths.

    ``samples`` (N x len(times)) is kept in memory for covariance-aware fits
    but is not persisted.
    """

    space: SpaceDescriptor
    eps: float
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_paths: int
    seed: int
    dt: float
    h: float
    wall_clock: float = 0.0
    experiment: str = "simulate"
    richardson: bool = False
    samples: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_samples(cls, samples: np.ndarray, **kw) -> "EnsembleResult":
        n = samples.shape[0]
        mean = samples.mean(axis=0)
        se = samples.std(axis=0, ddof=1) / math.sqrt(n)
        return cls(mean=mean, stderr=se, n_paths=n, samples=samples, **kw)

    def per_time(self) -> np.ndarray:
        return self.mean / self.times


def _validate_discretization(space: SpaceDescriptor, eps: float, dt: float, h: float):
    if space.is_graph:
        return
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not 0 < h <= eps / 4.0 * (1 + 1e-12):
        raise ValueError("h must satisfy 0 < h <= eps/4")
    if space.dim >= 2 and dt > (eps / 10.0) ** 2 * (1 + 1e-9):
        warnings.warn("dt exceeds (eps/10)^2; hitting bias may be large", stacklevel=3)


RICHARDSON_GAIN = 1.0 / (math.sqrt(2.0) - 1.0)


def _ensemble_path(common, i):
    space, eps, times, dt, h, seed, skip, start, richardson = common
    rng = RngSpec(seed, i)
    if space.is_graph:
        walk = sample_gasket_walk(GasketGraph(space.graph_depth), int(times[-1]), rng)
        return range_curve(walk, times.astype(np.int64))[0].astype(float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        path = sample_path(space, times[-1], dt, rng, start)
        v = sausage_volumes(path, eps, h, times, skip=skip)
        if not richardson:
            return v
        # the same path seen every second step; the sampled sausage misses
        # O(dt^1/2) of volume per unit time, so this cancels the leading term
        coarse = SampledPath(space, 2 * dt, path.points[::2])
        return v + (v - sausage_volumes(coarse, eps, h, times, skip=skip)) * RICHARDSON_GAIN


def run_ensemble(space: SpaceDescriptor, eps: float, times: Sequence[float],
                 n_paths: int, dt: float, h: float, seed: int,
                 workers: Optional[int] = None, skip: Optional[float] = None,
                 start=None, experiment: str = "simulate",
                 richardson: bool = False) -> EnsembleResult:
    """Mean sausage volume at each time, nested on each path (single pass).

    For the gasket, times are step counts and the volume is the range.
    ``richardson`` replaces each path's volume by ``V + (V - V_2dt) /
    (sqrt 2 - 1)`` with ``V_2dt`` from the same path at twice the step.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly ascending")
    if times[0] < 0:
        raise ValueError("times must be >= 0")
    if n_paths < 2:
        raise ValueError("need at least 2 paths")
    if space.is_graph:
        dt, h = 1.0, 1.0
        richardson = False
    _validate_discretization(space, eps, dt, h)
    if richardson:
        q = times / (2 * dt)
        if np.any(np.abs(q - np.round(q)) > 1e-9 * np.maximum(q, 1.0)):
            raise ValueError("richardson needs times that are multiples of 2 dt")
    t0 = time.perf_counter()
    rows = map_indices(_ensemble_path, (space, eps, times, dt, h, seed, skip, start,
                                        richardson),
                       range(n_paths), workers)
    samples = np.vstack(rows)
    return EnsembleResult.from_samples(
        samples, space=space, eps=eps, times=times, seed=seed, dt=dt, h=h,
        wall_clock=time.perf_counter() - t0, experiment=experiment,
        richardson=bool(richardson))


# ---------------------------------------------------------------------------
# fits

@dataclass
class FitResult:
    """Weighted least-squares fit.  ``a`` is the extrapolated limit (the
    slope for the power-law model); ``cov`` is the parameter covariance."""

    model: str
    a: float
    b: float
    residual: float
    cov: np.ndarray
    times: np.ndarray
    c: Optional[float] = None

    @property
    def a_stderr(self) -> float:
        i = 1 if self.model == "power-law" else 0
        return float(math.sqrt(self.cov[i, i]))

    @property
    def params(self) -> np.ndarray:
        p = [self.a, self.b] if self.model != "power-law" else [self.b, self.a]
        return np.array(p + ([self.c] if self.c is not None else []))


def default_model(dim: int) -> str:
    return "inverse-log" if dim == 2 else "inverse-sqrt"


def _transform(model: str, t: np.ndarray, v: np.ndarray, ref: np.ndarray):
    """Map volumes to the fitted ordinate.  ``ref`` linearizes the log."""
    if model == "power-law":
        return np.log(ref) + (v - ref) / ref
    if model == "inverse-log":
        return v * np.log(t) / t
    return v / t


def _design(model: str, t: np.ndarray) -> np.ndarray:
    one = np.ones_like(t)
    if model == "inverse-sqrt":
        return np.column_stack([one, t ** -0.5])
    if model == "inverse-sqrt-inverse":
        return np.column_stack([one, t ** -0.5, 1.0 / t])
    if model == "inverse-log":
        return np.column_stack([one, 1.0 / np.log(t)])
    if model == "power-law":
        return np.column_stack([one, np.log(t)])
    raise ValueError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")


def fit_curve(times, mean, stderr, model: str, samples: Optional[np.ndarray] = None
              ) -> FitResult:
    """Fit ``model`` to a mean curve.

    Weights come from the per-time standard errors.  When the per-path
    table is given the parameter covariance uses the full covariance of the
    time points (nested times share paths); otherwise it is ``(X^T W X)^-1``.
    """
    t = np.asarray(times, dtype=float)
    m = np.asarray(mean, dtype=float)
    se = np.asarray(stderr, dtype=float)
    X = _design(model, t)
    if t.size < 4:
        raise ValueError("fit needs at least 4 time points")
    if np.any(t <= (1.0 if model == "inverse-log" else 0.0)):
        raise ValueError("times out of range for the model")
    if model == "power-law":
        y = np.log(m)
        s = se / m
    else:
        scale = _transform(model, t, np.ones_like(t), m)
        y = m * scale
        s = se * scale
    if np.any(~np.isfinite(s)) or np.any(s <= 0):
        raise ValueError("standard errors must be positive")
    w = 1.0 / s ** 2
    A = X.T @ (w[:, None] * X)
    if np.linalg.matrix_rank(A) < X.shape[1] or np.linalg.cond(A) > 1e14:
        raise np.linalg.LinAlgError("singular design matrix")
    L = np.linalg.solve(A, X.T * w)
    beta = L @ y
    if samples is not None:
        ys = _transform(model, t, np.asarray(samples, dtype=float), m)
        sig = np.atleast_2d(np.cov(ys, rowvar=False)) / ys.shape[0]
        cov = L @ sig @ L.T
    else:
        cov = np.linalg.inv(A)
    resid = float(math.sqrt(np.sum(w * (y - X @ beta) ** 2)))
    if model == "power-law":
        return FitResult(model, float(beta[1]), float(beta[0]), resid, cov, t)
    c = float(beta[2]) if beta.size > 2 else None
    return FitResult(model, float(beta[0]), float(beta[1]), resid, cov, t, c)


def fit_limit(result: EnsembleResult, model: Optional[str] = None,
              use_samples: bool = True) -> FitResult:
    """Extrapolate the per-time constant of ``result``.

    inverse-sqrt: ``mean/t = a + b t^-1/2``; inverse-log: ``mean log t / t =
    a + b / log t``; inverse-sqrt-inverse adds ``c/t``; power-law fits
    ``log mean = b + a log t``.
    """
    model = model or default_model(result.space.dim)
    samples = result.samples if use_samples else None
    return fit_curve(result.times, result.mean, result.stderr, model, samples)


@dataclass
class ErrorBudget:
    """Per-time error components of an extrapolated constant.

    ``grid`` and ``step`` are measured on a few paired paths: the same path
    on cells h and h/2, and the same path subsampled to 2 dt (the step bias
    of an O(dt^1/2) scheme is the difference divided by sqrt(2) - 1).
    """

    stat: float
    grid: float
    step: float

    def total(self) -> float:
        return self.stat + self.grid + self.step


def _budget_path(common, i):
    space, eps, t, dt, h, seed = common
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        path = sample_path(space, t, dt, RngSpec(seed, i))
        coarse = SampledPath(space, 2 * dt, path.points[::2])
        v = sausage_volumes(path, eps, h, [t])[0]
        return (v, sausage_volumes(path, eps, h / 2, [t])[0],
                sausage_volumes(coarse, eps, h, [coarse.total_time])[0])


def error_budget(fit: FitResult, space: SpaceDescriptor, eps: float, t: float,
                 dt: float, h: float, n_paths: int = 8, seed: int = 0,
                 workers: Optional[int] = None) -> ErrorBudget:
    """Statistical, grid and step components for ``fit.a`` (per unit time at
    time ``t``)."""
    rows = np.array(map_indices(_budget_path, (space, eps, t, dt, h, seed),
                                range(n_paths), workers))
    grid = abs(np.mean(rows[:, 0] - rows[:, 1])) / t
    step = abs(np.mean(rows[:, 0] - rows[:, 2])) / t * RICHARDSON_GAIN
    return ErrorBudget(fit.a_stderr, float(grid), float(step))


# ---------------------------------------------------------------------------
# hitting-time sandwich

def sphere_design(dim: int, n: int = 32, seed: int = 7) -> np.ndarray:
    """Quasi-uniform points on the unit sphere.

    dim 2: equally spaced angles.  dim 3 with n = 32: the 12 icosahedron
    vertices with the 20 face directions.  Otherwise: normalized Gaussian
    points from a fixed stream.
    """
    if dim == 1:
        return np.array([[-1.0], [1.0]])
    if dim == 2:
        th = 2 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(th), np.sin(th)])
    if dim == 3 and n == 32:
        p = (1 + math.sqrt(5)) / 2
        v = []
        for s1 in (-1, 1):
            for s2 in (-1, 1):
                v += [(0, s1, s2 * p), (s1, s2 * p, 0), (s2 * p, 0, s1)]
        v = np.array(v, dtype=float)
        v /= np.linalg.norm(v, axis=1)[:, None]
        faces = []
        for i in range(12):
            for j in range(i + 1, 12):
                for k in range(j + 1, 12):
                    tri = v[[i, j, k]]
                    if all(np.dot(tri[a], tri[b]) > 0.4 for a, b in ((0, 1), (0, 2), (1, 2))):
                        c = tri.sum(axis=0)
                        faces.append(c / np.linalg.norm(c))
        return np.vstack([v, np.array(faces)])
    g = np.random.Generator(np.random.Philox(key=seed)).standard_normal((n, dim))
    return g / np.linalg.norm(g, axis=1)[:, None]


@dataclass
class SandwichReport:
    """Margins of the two hitting-time inequalities.

    upper: ``E^x occ[0, t+T] - P(T_B <= t) * min_w E^w occ[0, T]``
    (sampled min over the sphere is >= the true inf: conservative).
    lower: ``P(T_B <= t) * max_w E^w occ[0, t] - E^x occ[0, t]``
    (sampled max is <= the true sup: anti-conservative).
    Occupation is of ``B(y, a eps)``; T_B is the hitting time of ``B(y, eps)``.
    """

    dim: int
    x: np.ndarray
    y: np.ndarray
    eps: float
    a: float
    t: float
    T: float
    n_paths: int
    dt: float
    p_hit: float
    p_hit_se: float
    upper_lhs: float
    upper_lhs_se: float
    upper_inf: float
    upper_inf_se: float
    lower_lhs: float
    lower_lhs_se: float
    lower_sup: float
    lower_sup_se: float
    upper_label: str = "conservative"
    lower_label: str = "anti-conservative"

    @property
    def upper_margin(self) -> float:
        return self.upper_lhs - self.p_hit * self.upper_inf

    @property
    def upper_sigma(self) -> float:
        return math.sqrt(self.upper_lhs_se ** 2 + (self.upper_inf * self.p_hit_se) ** 2
                         + (self.p_hit * self.upper_inf_se) ** 2)

    @property
    def lower_margin(self) -> float:
        return self.p_hit * self.lower_sup - self.lower_lhs

    @property
    def lower_sigma(self) -> float:
        return math.sqrt(self.lower_lhs_se ** 2 + (self.lower_sup * self.p_hit_se) ** 2
                         + (self.p_hit * self.lower_sup_se) ** 2)

    def passed(self, k: float = 2.0) -> bool:
        return (self.upper_margin >= -k * self.upper_sigma
                and self.lower_margin >= -k * self.lower_sigma)


def _sandwich_from_x(common, i):
    space, x, y, eps, a, n_t, n_tT, dt, seed, strict = common
    path = sample_path(space, n_tT * dt, dt, RngSpec(seed, i), x)
    p = path.points
    hit = K.first_inside(p, y, eps, 1 if strict else 0)
    return (1.0 if 0 <= hit <= n_t else 0.0,
            K.count_inside(p, y, a * eps, 0, n_tT) * dt,
            K.count_inside(p, y, a * eps, 0, n_t) * dt)


def _sandwich_from_sphere(common, i):
    space, y, ws, eps, a, n_T, n_t, dt, seed = common
    n = max(n_T, n_t)
    out = np.empty((2, ws.shape[0]))
    if space.variant == "euclidean":
        # translation invariance: one increment path serves every start point
        p = sample_path(space, n * dt, dt, RngSpec(seed, i)).points
        for k in range(ws.shape[0]):
            c = y - ws[k]
            out[0, k] = K.count_inside(p, c, a * eps, 0, n_T) * dt
            out[1, k] = K.count_inside(p, c, a * eps, 0, n_t) * dt
        return out
    for k in range(ws.shape[0]):
        p = sample_path(space, n * dt, dt, RngSpec(seed, i), ws[k]).points
        out[0, k] = K.count_inside(p, y, a * eps, 0, n_T) * dt
        out[1, k] = K.count_inside(p, y, a * eps, 0, n_t) * dt
    return out


def verify_sandwich(space: SpaceDescriptor, x, y, eps: float, a: float, t: float,
                    T: float, n_paths: int, dt: Optional[float] = None, seed: int = 0,
                    n_sphere: int = 32, workers: Optional[int] = None,
                    strict: bool = False) -> SandwichReport:
    """Estimate both sides of the hitting-time sandwich by Monte Carlo.

    ``strict`` makes the hitting time ignore the start (``inf{s > 0}``).

    Paths from x use streams ``0..N-1``; paths from the sphere use
    ``N..2N-1``, so the two sides are independent.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if space.is_graph:
        raise ValueError("the sandwich check runs in R^d")
    if not 0 < a < 1:
        raise ValueError("a must lie in (0, 1)")
    if not np.linalg.norm(x - y) > eps:
        raise ValueError("need |x - y| > eps")
    if n_paths < 2:
        raise ValueError("need at least 2 paths")
    dt = 1e-3 * eps ** 2 if dt is None else dt
    n_t = int(round(t / dt))
    n_T = int(round(T / dt))
    ws = y + eps * sphere_design(space.dim, n_sphere)
    xs = np.array(map_indices(_sandwich_from_x,
                              (space, x, y, eps, a, n_t, n_t + n_T, dt, seed, strict),
                              range(n_paths), workers))
    ss = np.array(map_indices(_sandwich_from_sphere,
                              (space, y, ws, eps, a, n_T, n_t, dt, seed),
                              range(n_paths, 2 * n_paths), workers))
    rt = math.sqrt(n_paths)
    m = xs.mean(axis=0)
    s = xs.std(axis=0, ddof=1) / rt
    occ_T = ss[:, 0, :]
    occ_t = ss[:, 1, :]
    k_inf = int(np.argmin(occ_T.mean(axis=0)))
    k_sup = int(np.argmax(occ_t.mean(axis=0)))
    return SandwichReport(
        space.dim, x, y, eps, a, t, T, n_paths, dt,
        p_hit=float(m[0]), p_hit_se=float(s[0]),
        upper_lhs=float(m[1]), upper_lhs_se=float(s[1]),
        upper_inf=float(occ_T[:, k_inf].mean()),
        upper_inf_se=float(occ_T[:, k_inf].std(ddof=1) / rt),
        lower_lhs=float(m[2]), lower_lhs_se=float(s[2]),
        lower_sup=float(occ_t[:, k_sup].mean()),
        lower_sup_se=float(occ_t[:, k_sup].std(ddof=1) / rt))


def hitting_probability(space: SpaceDescriptor, x, y, eps: float, t: float,
                        n_paths: int, dt: float, seed: int = 0,
                        workers: Optional[int] = None) -> tuple[float, float]:
    """MC estimate and standard error of ``P^x(T_B(y,eps) <= t)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n_t = int(round(t / dt))
    rows = np.array(map_indices(_sandwich_from_x,
                                (space, x, y, eps, 0.5, n_t, n_t, dt, seed, False),
                                range(n_paths), workers))
    return float(rows[:, 0].mean()), float(rows[:, 0].std(ddof=1) / math.sqrt(n_paths))


# ---------------------------------------------------------------------------
# fluctuation between the homogeneous spaces

@dataclass
class FluctuationResult:
    dim: int
    eps: float
    times: np.ndarray
    curves: dict          # name -> (mean/t, stderr/t)
    fits: dict            # name -> FitResult
    ensembles: dict = field(default_factory=dict, repr=False)

    @property
    def ratio(self) -> float:
        return self.fits["B"].a / self.fits["A"].a

    @property
    def ratio_stderr(self) -> float:
        fa, fb = self.fits["A"], self.fits["B"]
        return self.ratio * math.hypot(fa.a_stderr / fa.a, fb.a_stderr / fb.a)


def homogeneous_space(dim: int, value: float) -> SpaceDescriptor:
    if value == 1.0:
        return SpaceDescriptor.euclidean(dim)
    return SpaceDescriptor.radial(dim, RadialMetricProfile((), value, value))


def fluctuation_experiment(dim: int, profile: Optional[RadialMetricProfile], eps: float,
                           times, n_paths: int, dt: float, h: float, seed: int = 0,
                           workers: Optional[int] = None, model: str = "inverse-sqrt",
                           reuse: Optional[dict] = None) -> FluctuationResult:
    """Per-time sausage constants on the plateau-1 space (A), the constant
    plateau space (B) and, if given, a shell profile.

    ``reuse`` maps curve names to already computed ensembles with matching
    settings.  Seeds: A uses ``seed``, B ``seed + 1``, the shell ``seed + 2``.
    """
    if dim < 3:
        raise ValueError("dim must be >= 3")
    high = profile.high if profile is not None else 4.0
    spaces = {"A": homogeneous_space(dim, 1.0), "B": homogeneous_space(dim, high)}
    if profile is not None and not profile.is_constant:
        spaces["shell"] = SpaceDescriptor.radial(dim, profile)
    reuse = reuse or {}
    ens, curves, fits = {}, {}, {}
    for k, (name, sp) in enumerate(spaces.items()):
        r = reuse.get(name)
        if r is None:
            r = run_ensemble(sp, eps, times, n_paths, dt, h, seed + k, workers,
                             experiment=f"fluctuation-{name}")
        ens[name] = r
        t = np.asarray(r.times)
        curves[name] = (r.mean / t, r.stderr / t)
        fits[name] = fit_limit(r, model)
    return FluctuationResult(dim, eps, np.asarray(times, dtype=float), curves, fits, ens)


# ---------------------------------------------------------------------------
# LIL trace

@dataclass
class LilTrace:
    times: np.ndarray
    raw: np.ndarray
    sup_normalizer: np.ndarray
    inf_normalizer: np.ndarray

    @property
    def scaled_sup(self) -> np.ndarray:
        return self.raw / self.sup_normalizer

    @property
    def scaled_inf(self) -> np.ndarray:
        return self.raw / self.inf_normalizer

    def band(self, decades: float = 2.0) -> dict:
        """Empirical (min, max, max/min) of both scaled series over the last
        ``decades`` dyadic decades (times >= horizon / 2**decades)."""
        sel = self.times >= self.times[-1] / 2.0 ** decades
        out = {}
        for name, s in (("sup", self.scaled_sup[sel]), ("inf", self.scaled_inf[sel])):
            out[name] = (float(s.min()), float(s.max()), float(s.max() / s.min()))
        return out


def lil_trace(space: SpaceDescriptor, V: ScalingFunction, phi: ScalingFunction,
              eps: float, horizon: float, seed: int, n_points: int = 60,
              dt: Optional[float] = None, h: Optional[float] = None) -> LilTrace:
    """Sausage volume (or range) of one long path at log-spaced times, with
    both LIL normalizers."""
    if not horizon >= math.e ** 2:
        raise ValueError("horizon must be at least e^2")
    t0 = math.e ** 2
    times = np.unique(np.geomspace(t0, horizon, n_points))
    rng = RngSpec(seed, 0)
    if space.is_graph:
        times = np.unique(np.ceil(times)).astype(np.int64)
        walk = sample_gasket_walk(GasketGraph(space.graph_depth), int(times[-1]), rng)
        raw = range_curve(walk, times)[0].astype(float)
        times = times.astype(float)
    else:
        dt = 1e-3 * eps ** 2 if dt is None else dt
        h = eps / 8.0 if h is None else h
        path = sample_path(space, float(times[-1]), dt, rng)
        raw = sausage_volumes(path, eps, h, times)
    norms = np.array([lil_normalizers(V, phi, float(t)) for t in times])
    return LilTrace(times, raw, norms[:, 0], norms[:, 1])


# ---------------------------------------------------------------------------
# Green function comparison

@dataclass
class GreenRow:
    y_norm: float
    z: np.ndarray
    separation: float
    ball: float
    green_bm: float
    green_raw: float      # truncated-horizon occupation density of M
    green_raw_se: float
    diff: float           # coupled estimate of G^M - G^BM
    diff_se: float
    hit_fraction: float


def _green_path(common, i):
    profile, y, z, delta, n, dt, seed, support = common
    dim = y.shape[0]
    z_noise = RngSpec(seed, i).generator().standard_normal((n, dim))
    b, s, o = profile.arrays()
    one = np.zeros(0)
    # both processes use the same Euler scheme and noise, so they agree
    # bitwise until the path first enters the modified ball
    pb = K.radial_em(y, z_noise, dt, one, 1.0, 4.0)
    occ_b = K.count_inside(pb, z, delta, 0, n)
    j = K.first_inside(pb, np.zeros(dim), support, 0)
    if j < 0:
        return occ_b * dt, 0.0, 0.0
    pm = K.radial_em(pb[j], z_noise[j:], dt, b, s, o)
    occ_m = K.count_inside(pb, z, delta, 0, j) + K.count_inside(pm, z, delta, 0, n - j)
    return occ_m * dt, (occ_m - occ_b) * dt, 1.0


def green_comparison(profile: RadialMetricProfile, dim: int, sweep: Sequence[float],
                     eps1: float, eps2: float, n_paths: int, horizon=100.0,
                     dt: float = 1e-2, seed: int = 0, ball: Optional[float] = None,
                     workers: Optional[int] = None) -> list[GreenRow]:
    """Compare the Green function of the modified space with ``green_bm``.

    For each ``|y|`` in ``sweep`` take ``y = |y| e_1`` and ``z`` at distance
    ``eps2`` from y toward the origin (so ``z`` lies in the annulus
    ``eps1 <= |z - y| <= eps2``).  G is estimated as occupation time of
    ``B(z, ball)`` over ``[0, horizon]`` divided by the ball volume; the ball
    avoids y and the modified region, where both Green functions are
    harmonic, so the ball average equals the value at z.  The difference
    uses Brownian paths coupled to the modified ones through shared noise,
    which cancels everything before the first visit to the modified ball.
    ``horizon`` is one value or one per sweep entry.
    """
    if dim < 3:
        raise ValueError("Green function comparison needs dim >= 3")
    if not 0 < eps1 <= eps2:
        raise ValueError("need 0 < eps1 <= eps2")
    support = profile.support_radius()
    if profile.value_at_infinity() != 1.0:
        raise ValueError("profile must equal 1 outside a bounded ball")
    horizons = np.broadcast_to(np.asarray(horizon, dtype=float), (len(sweep),))
    if np.any(horizons <= 0):
        raise ValueError("horizon must be positive")
    rows = []
    for k, r in enumerate(sweep):
        n = int(round(horizons[k] / dt))
        y = np.zeros(dim)
        y[0] = r
        z = y.copy()
        z[0] -= eps2
        room = np.linalg.norm(z) - support
        delta = min(0.9 * eps2, room) if ball is None else ball
        if not 0 < delta < eps2 or delta > room:
            raise ValueError(f"no admissible ball around z for |y| = {r}")
        vol = ball_volume(dim, delta)
        common = (profile, y, z, delta, n, dt, seed + k, max(support, 1e-12))
        vals = np.array(map_indices(_green_path, common, range(n_paths), workers))
        rt = math.sqrt(n_paths)
        m = vals.mean(axis=0)
        s = vals.std(axis=0, ddof=1) / rt
        rows.append(GreenRow(float(r), z, eps2, delta, green_bm(dim, eps2),
                             m[0] / vol, s[0] / vol, m[1] / vol, s[1] / vol, float(m[2])))
    return rows


# ---------------------------------------------------------------------------
# excess over the linear term

@dataclass
class ExcessSeries:
    times: np.ndarray
    excess: np.ndarray
    stderr: np.ndarray
    capacity: float
    ensemble: Optional[EnsembleResult] = field(default=None, repr=False)

    def stabilized(self, k: float = 3.0, last: int = 3) -> bool:
        """Last ``last`` values pairwise within ``k`` combined standard errors."""
        e = self.excess[-last:]
        s = self.stderr[-last:]
        for i in range(len(e)):
            for j in range(i + 1, len(e)):
                if abs(e[i] - e[j]) >= k * math.hypot(s[i], s[j]):
                    return False
        return True


def convergence_excess(dim: int, profile: Optional[RadialMetricProfile], eps: float,
                       times, n_paths: int, dt: float, h: float, seed: int = 0,
                       workers: Optional[int] = None,
                       skip: Optional[float] = None,
                       richardson: bool = False) -> ExcessSeries:
    """``t -> mean V(t) - t * capacity_ball(dim, eps)``.

    Any per-time bias of the volume turns into a linear drift here, so
    ``richardson`` (see `run_ensemble`) is usually wanted.
    """
    if dim < 6:
        raise ValueError("excess convergence needs dim >= 6")
    if profile is None or (profile.is_constant and profile.start == 1.0):
        space = SpaceDescriptor.euclidean(dim)
    else:
        space = SpaceDescriptor.radial(dim, profile)
    r = run_ensemble(space, eps, times, n_paths, dt, h, seed, workers, skip,
                     experiment="excess", richardson=richardson)
    cap = capacity_ball(dim, eps)
    return ExcessSeries(r.times, r.mean - r.times * cap, r.stderr, cap, r)
