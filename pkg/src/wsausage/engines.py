"""Path samplers and first-passage times along sampled paths."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .space import GasketGraph, RadialMetricProfile, SpaceDescriptor


@dataclass(frozen=True)
class RngSpec:
    """Counter-based stream for path ``index`` under master ``seed``.

    The stream is Philox keyed by ``seed + index * 2**64``, so any path can be
    regenerated alone, in any order, on any worker.
    """

    seed: int
    index: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 <= self.index < 2 ** 64:
            raise ValueError("index must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed + (self.index << 64)))

    def child(self, index: int) -> "RngSpec":
        return RngSpec(self.seed, index)


@dataclass
class SampledPath:
    """Uniformly time-stepped trajectory.

    ``points`` has shape (n + 1, dim); for the gasket the rows are integer
    vertex addresses and ``step`` is 1.
    """

    space: SpaceDescriptor
    step: float
    points: np.ndarray

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[0] == 0:
            raise ValueError("points must be a non-empty (n, dim) array")
        if not self.step > 0:
            raise ValueError("step must be positive")

    @property
    def n_steps(self) -> int:
        return self.points.shape[0] - 1

    @property
    def total_time(self) -> float:
        return self.n_steps * self.step

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.points.shape[0]) * self.step

    def index_at(self, t: float) -> int:
        """Last grid index with time <= t (within rounding)."""
        if t < 0:
            raise ValueError("time must be >= 0")
        i = int(math.floor(t / self.step + 1e-9))
        return min(i, self.n_steps)

    def to_csv(self, fname) -> None:
        """Dump ``(t, x_1, ..., x_d)`` rows; for debugging."""
        data = np.column_stack([self.times, self.points])
        hdr = "t," + ",".join(f"x{i + 1}" for i in range(self.points.shape[1]))
        np.savetxt(fname, data, delimiter=",", header=hdr, comments="")


def n_steps_for(t: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t >= dt * (1 - 1e-12):
        raise ValueError("horizon must be at least one step")
    return max(1, int(math.floor(t / dt + 1e-9)))


def _start(dim: int, start) -> np.ndarray:
    if start is None:
        return np.zeros(dim)
    x0 = np.asarray(start, dtype=float)
    if x0.shape != (dim,):
        raise ValueError("start point has the wrong dimension")
    return x0


def sample_bm_path(dim: int, t: float, dt: float, rng: RngSpec,
                   start=None) -> SampledPath:
    """Standard Brownian motion (per-coordinate variance ``dt`` per step)."""
    n = n_steps_for(t, dt)
    z = rng.generator().standard_normal((n, dim))
    pts = np.empty((n + 1, dim))
    pts[0] = _start(dim, start)
    np.cumsum(z * math.sqrt(dt), axis=0, out=pts[1:])
    if start is not None:
        pts[1:] += pts[0]
    return SampledPath(SpaceDescriptor.euclidean(dim), dt, pts)


def radial_drift(profile: RadialMetricProfile, dim: int, x) -> np.ndarray:
    """Drift of the diffusion for ``G(|x|) I``: ``(dim-2) G'/(4 G^2) x/|x|``."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        return np.zeros_like(x)
    b, s, o = profile.arrays()
    g, dg = K.radial_factor(r, b, s, o)
    return (dim - 2) * dg / (4.0 * g * g) * x / r


def sample_radial_path(dim: int, profile: RadialMetricProfile, t: float, dt: float,
                       rng: RngSpec, start=None) -> SampledPath:
    """Euler-Maruyama for Brownian motion of the metric ``G(|x|) I``.

    Each step adds the radial drift times ``dt`` and ``G^(-1/2)`` times a
    Gaussian increment of variance ``dt``.  With ``G = 1`` the output equals
    ``sample_bm_path`` on the same stream.
    """
    if dim < 2:
        raise ValueError("radial metric needs dim >= 2")
    n = n_steps_for(t, dt)
    if dt > 0.01 and not profile.is_constant:
        warnings.warn("dt > 0.01 is coarse relative to the width-1 connectors",
                      stacklevel=2)
    z = rng.generator().standard_normal((n, dim))
    b, s, o = profile.arrays()
    pts = K.radial_em(_start(dim, start), z, dt, b, s, o)
    return SampledPath(SpaceDescriptor.radial(dim, profile), dt, pts)


def sample_path(space: SpaceDescriptor, t: float, dt: float, rng: RngSpec,
                start=None) -> SampledPath:
    """Dispatch on the space variant; for the gasket ``t`` counts steps."""
    if space.variant == "euclidean":
        return sample_bm_path(space.dim, t, dt, rng, start)
    if space.variant == "radial":
        return sample_radial_path(space.dim, space.profile, t, dt, rng, start)
    return sample_gasket_walk(GasketGraph(space.graph_depth), int(round(t)), rng)


def sample_gasket_walk(graph: GasketGraph, steps: int, rng: RngSpec) -> SampledPath:
    """Simple random walk from the origin, uniform over neighbours."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    # one draw in [0, 4) per step, reduced mod the degree (2 or 4): uniform
    choices = rng.generator().integers(0, 4, size=steps, dtype=np.int64)
    walk = K.gasket_walk(choices, 0, 0)
    if int(walk.sum(axis=1).max()) > (1 << graph.depth):
        raise RuntimeError("walk left the gasket depth")
    return SampledPath(SpaceDescriptor.gasket(graph.depth), 1.0, walk)


def hitting_time(path: SampledPath, center, eps: float,
                 strict: bool = False) -> Optional[float]:
    """First grid time with ``|X - center| < eps``, or None.

    By default time 0 counts; ``strict=True`` looks only at positive times.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    c = np.asarray(center, dtype=float)
    i = K.first_inside(path.points.astype(float, copy=False), c, eps,
                       1 if strict else 0)
    return None if i < 0 else i * path.step


def exit_time(path: SampledPath, R: float) -> Optional[float]:
    """First grid time with ``|X| >= R``, or None."""
    if not R > 0:
        raise ValueError("R must be positive")
    i = K.first_outside(path.points.astype(float, copy=False), R)
    return None if i < 0 else i * path.step
