"""Concrete spaces: Euclidean Brownian motion, Brownian motion for a radial
conformal metric, and the simple random walk on the pre-Sierpinski gasket.

The gasket is stored implicitly.  Vertices are integer pairs ``(a, b)`` in
triangular-lattice coordinates (planar position ``(a + b/2, b*sqrt(3)/2)``),
and the unit up-triangle with lower-left corner ``(a, b)`` is part of the
graph iff ``a, b >= 0`` and ``a & b == 0``.  The origin is the corner of a
one-sided wedge and has degree 2; every other vertex has degree 4.
"""
from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from . import _kernels as K

GASKET_ALPHA = math.log(3.0) / math.log(2.0)
GASKET_BETA = math.log(5.0) / math.log(2.0)


@dataclass(frozen=True)
class ScalingFunction:
    """Power law ``r -> prefactor * r**exponent``, optionally with a different
    exponent for ``r > 1`` (``outer``).  Both pieces share the prefactor so the
    two-regime form is continuous at ``r = 1``.
    """

    exponent: float
    prefactor: float = 1.0
    outer: Optional[float] = None

    def __post_init__(self):
        if not self.exponent > 0 or not self.prefactor > 0:
            raise ValueError("exponent and prefactor must be positive")
        if self.outer is not None and not self.outer > 0:
            raise ValueError("outer exponent must be positive")

    @classmethod
    def power(cls, exponent: float, prefactor: float = 1.0) -> "ScalingFunction":
        return cls(exponent, prefactor)

    @classmethod
    def two_regime(cls, inner: float, outer: float,
                   prefactor: float = 1.0) -> "ScalingFunction":
        return cls(inner, prefactor, outer)

    @property
    def kind(self) -> str:
        return "pure-power" if self.outer is None else "two-regime"

    @property
    def inner(self) -> float:
        return self.exponent

    @property
    def envelope(self) -> tuple[float, float]:
        """(min, max) of the exponents; the growth bounds hold with C = 1."""
        e2 = self.exponent if self.outer is None else self.outer
        return min(self.exponent, e2), max(self.exponent, e2)

    def _exp(self, r):
        if self.outer is None:
            return self.exponent
        return np.where(np.asarray(r) > 1.0, self.outer, self.exponent)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = self.prefactor * np.power(r, self._exp(r))
        return float(out) if out.ndim == 0 else out

    def inverse(self, v):
        """Solve ``self(r) = v`` for r."""
        v = np.asarray(v, dtype=float) / self.prefactor
        if self.outer is None:
            out = np.power(v, 1.0 / self.exponent)
        else:
            e = np.where(v > 1.0, self.outer, self.exponent)
            out = np.power(v, 1.0 / e)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HeatKernelParams:
    """Constants of two-sided sub-Gaussian heat kernel bounds for (V, phi)."""

    V: ScalingFunction
    phi: ScalingFunction
    c5: float = 1.0
    c6: float = 1.0
    c7: float = 1.0
    c8: float = 1.0

    def __post_init__(self):
        for name in ("c5", "c6", "c7", "c8"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def alpha(self) -> float:
        return self.V.exponent

    @property
    def beta(self) -> float:
        return self.phi.exponent


@dataclass(frozen=True)
class RadialMetricProfile:
    """Radial conformal factor G with alternating plateaus.

    ``G = start`` on ``[0, R_1 - 1)``; on each width-1 connector ``[R_k - 1, R_k)``
    G moves to the other plateau value along ``S(u) = 6u^5 - 15u^4 + 10u^3``;
    it then stays flat until the next connector.  With ``start = 1`` the
    plateaus are ``G = 1`` on ``[R_{2j}, R_{2j+1} - 1)`` and ``G = high`` on
    ``[R_{2j+1}, R_{2j+2} - 1)``.
    """

    breakpoints: tuple[float, ...] = ()
    start: float = 1.0
    high: float = 4.0

    def __post_init__(self):
        b = tuple(float(x) for x in self.breakpoints)
        object.__setattr__(self, "breakpoints", b)
        if not self.high >= 1.0:
            raise ValueError("plateau value must be >= 1")
        if self.start not in (1.0, self.high):
            raise ValueError("start must be 1 or the high plateau value")
        if b and b[0] < 1.0:
            raise ValueError("first breakpoint must be >= 1 (connector width 1)")
        for lo, hi in zip(b, b[1:]):
            if hi - lo < 1.0:
                raise ValueError("breakpoints must be at least 1 apart")

    @classmethod
    def constant(cls, value: float = 1.0) -> "RadialMetricProfile":
        return cls((), value, max(value, 1.0) if value != 1.0 else 4.0)

    @property
    def other(self) -> float:
        return self.high if self.start == 1.0 else 1.0

    @property
    def is_constant(self) -> bool:
        return not self.breakpoints

    def arrays(self):
        return np.asarray(self.breakpoints, dtype=float), self.start, self.other

    def support_radius(self) -> float:
        """Radius beyond which G is constant."""
        return self.breakpoints[-1] if self.breakpoints else 0.0

    def value_at_infinity(self) -> float:
        return self.start if len(self.breakpoints) % 2 == 0 else self.other


def metric_factor(profile: RadialMetricProfile, r):
    """G(r) for scalar or array ``r >= 0``."""
    b, s, o = profile.arrays()
    if np.ndim(r) == 0:
        if r < 0:
            raise ValueError("r must be >= 0")
        return K.radial_factor(float(r), b, s, o)[0]
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be >= 0")
    return K.radial_factor_many(r.ravel(), b, s, o)[0].reshape(r.shape)


def metric_factor_derivative(profile: RadialMetricProfile, r):
    b, s, o = profile.arrays()
    r = np.asarray(r, dtype=float)
    out = K.radial_factor_many(np.atleast_1d(r).ravel(), b, s, o)[1]
    return float(out[0]) if r.ndim == 0 else out.reshape(r.shape)


def measure_density(profile: RadialMetricProfile, dim: int, x):
    """Density of the Riemannian volume w.r.t. Lebesgue: ``G(|x|)**(dim/2)``.

    ``x`` is one point of shape (dim,) or an array of points (..., dim).
    """
    if dim < 2:
        raise ValueError("radial metric needs dim >= 2")
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    return np.power(metric_factor(profile, r), dim / 2.0)


def _stencil(dim: int, reach: int = 2) -> np.ndarray:
    """Primitive lattice directions with max-norm <= reach."""
    out = []
    for v in itertools.product(range(-reach, reach + 1), repeat=dim):
        if any(v) and math.gcd(*[abs(c) for c in v]) == 1:
            out.append(v)
    return np.array(out, dtype=np.int64)


def riemannian_distance_bound(profile: RadialMetricProfile, dim: int, x, y,
                              mesh: float, margin: Optional[float] = None) -> float:
    """Lattice shortest-path approximation of the distance for ``G(|x|) I``.

    The lattice has spacing ``mesh`` and covers the axis-aligned box around
    the segment, padded by ``margin`` (default: half the Euclidean distance).
    Edges join lattice points along primitive directions of max-norm <= 2 and
    carry weight ``sqrt(G(midpoint)) * length``; the endpoints are joined to
    their nearest lattice points by straight segments.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (dim,) or y.shape != (dim,):
        raise ValueError("points must have shape (dim,)")
    if dim < 2:
        raise ValueError("dim must be >= 2")
    dist = float(np.linalg.norm(x - y))
    if dist == 0.0:
        raise ValueError("x and y must differ")
    if mesh <= 0 or mesh >= dist / 4.0:
        raise ValueError("mesh must be in (0, |x-y|/4)")
    pad = 0.5 * dist if margin is None else margin
    lo = np.minimum(x, y) - pad
    hi = np.maximum(x, y) + pad
    shape = np.ceil((hi - lo) / mesh).astype(np.int64) + 1
    n = int(np.prod(shape))
    grid = np.stack(np.meshgrid(*[np.arange(s) for s in shape], indexing="ij"),
                    axis=-1).reshape(-1, dim)
    pos = lo + grid * mesh
    rows, cols, wts = [], [], []
    strides = np.array([int(np.prod(shape[a + 1:])) for a in range(dim)])
    for v in _stencil(dim):
        if tuple(v) < tuple(-v):
            continue            # undirected: one of each +/- pair
        tgt = grid + v
        ok = np.all((tgt >= 0) & (tgt < shape), axis=1)
        src = np.nonzero(ok)[0]
        dst = src + int(strides @ v)
        mid = pos[src] + 0.5 * mesh * v
        g = metric_factor(profile, np.linalg.norm(mid, axis=1))
        rows.append(src)
        cols.append(dst)
        wts.append(np.sqrt(g) * mesh * float(np.linalg.norm(v)))
    # endpoint links to the nearest lattice point
    ends = []
    for p in (x, y):
        k = np.clip(np.rint((p - lo) / mesh).astype(np.int64), 0, shape - 1)
        j = int(strides @ k)
        q = pos[j]
        g = metric_factor(profile, float(np.linalg.norm(0.5 * (p + q))))
        ends.append((j, math.sqrt(g) * float(np.linalg.norm(p - q))))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    wts = np.concatenate(wts)
    graph = coo_matrix((wts, (rows, cols)), shape=(n, n)).tocsr()
    d = dijkstra(graph, directed=False, indices=ends[0][0])
    return float(d[ends[1][0]] + ends[0][1] + ends[1][1])


class GasketGraph:
    """The one-sided infinite pre-Sierpinski gasket with unit edges.

    Adjacency is arithmetic, so no vertex set is stored.  Graph distances
    from the origin come from breadth-first tables that are grown on demand
    (doubling the level) under a lock; reads of a finished table are safe
    from any thread.
    """

    def __init__(self, depth: int = 40):
        if not 1 <= depth <= 61:
            raise ValueError("depth must be in [1, 61]")
        self.depth = depth
        self._dist = None
        self._level = -1
        self._lock = threading.Lock()

    def __repr__(self):
        return f"GasketGraph(depth={self.depth})"

    def __eq__(self, other):
        return isinstance(other, GasketGraph) and other.depth == self.depth

    def __hash__(self):
        return hash(("gasket", self.depth))

    def is_vertex(self, v) -> bool:
        a, b = int(v[0]), int(v[1])
        if a < 0 or b < 0 or a + b > (1 << self.depth):
            return False
        return (K.gasket_is_triangle(a, b) or K.gasket_is_triangle(a - 1, b)
                or K.gasket_is_triangle(a, b - 1))

    def neighbors(self, v) -> list[tuple[int, int]]:
        if not self.is_vertex(v):
            raise ValueError(f"invalid gasket vertex {tuple(v)!r}")
        out = np.empty((6, 2), dtype=np.int64)
        n = K.gasket_nbrs(int(v[0]), int(v[1]), out)
        return [(int(out[i, 0]), int(out[i, 1])) for i in range(n)]

    def degree(self, v) -> int:
        return len(self.neighbors(v))

    @staticmethod
    def embed(v) -> np.ndarray:
        """Planar coordinates of vertex addresses (shape (..., 2))."""
        v = np.asarray(v, dtype=float)
        return np.stack([v[..., 0] + 0.5 * v[..., 1],
                         v[..., 1] * math.sqrt(3.0) / 2.0], axis=-1)

    def distance_table(self, level: int) -> np.ndarray:
        """Distances from the origin for vertices with ``a + b <= 2**level``
        (-1 marks non-vertices).  Every vertex at graph distance <= 2**level
        lies in that triangle.
        """
        if level > self.depth:
            raise ValueError("level exceeds graph depth")
        with self._lock:
            if level > self._level:
                self._dist = K.gasket_bfs(level)
                self._level = level
            dist = self._dist
        side = 1 << level
        return dist[: side + 1, : side + 1]

    def ball_count(self, radius: int) -> int:
        """Number of vertices within graph distance ``radius`` of the origin."""
        level = max(0, int(math.ceil(math.log2(max(radius, 1)))))
        d = self.distance_table(level)
        return int(np.count_nonzero((d >= 0) & (d <= radius)))


def gasket_neighbors(graph: GasketGraph, v) -> list[tuple[int, int]]:
    return graph.neighbors(v)


@dataclass(frozen=True)
class SpaceDescriptor:
    """Which process a run simulates.

    variant is one of ``"euclidean"``, ``"radial"`` or ``"gasket"``.
    """

    variant: str = "euclidean"
    dim: int = 3
    profile: Optional[RadialMetricProfile] = None
    graph_depth: int = 40

    def __post_init__(self):
        if self.variant not in ("euclidean", "radial", "gasket"):
            raise ValueError(f"unknown space variant {self.variant!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.variant == "radial":
            if self.dim < 2:
                raise ValueError("radial metric needs dim >= 2")
            if self.profile is None:
                object.__setattr__(self, "profile", RadialMetricProfile())
        if self.variant == "gasket" and self.dim != 2:
            raise ValueError("the gasket is 2-dimensional")

    @classmethod
    def euclidean(cls, dim: int) -> "SpaceDescriptor":
        return cls("euclidean", dim)

    @classmethod
    def radial(cls, dim: int, profile: RadialMetricProfile) -> "SpaceDescriptor":
        return cls("radial", dim, profile)

    @classmethod
    def gasket(cls, depth: int = 40) -> "SpaceDescriptor":
        return cls("gasket", 2, None, depth)

    @property
    def is_graph(self) -> bool:
        return self.variant == "gasket"

    def density(self, x):
        """mu-density at points ``x`` (..., dim)."""
        if self.variant == "radial":
            return measure_density(self.profile, self.dim, x)
        return np.ones(np.shape(x)[:-1])

    def constant_density(self) -> Optional[float]:
        """The density if it is constant in space, else None."""
        if self.variant == "radial":
            if not self.profile.is_constant:
                return None
            return self.profile.start ** (self.dim / 2.0)
        return 1.0

    def describe(self) -> dict:
        out = {"variant": self.variant, "dim": self.dim}
        if self.profile is not None:
            out["breakpoints"] = list(self.profile.breakpoints)
            out["start"] = self.profile.start
            out["high"] = self.profile.high
        if self.variant == "gasket":
            out["graph_depth"] = self.graph_depth
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SpaceDescriptor":
        prof = None
        if d.get("variant") == "radial":
            prof = RadialMetricProfile(tuple(d.get("breakpoints", ())),
                                       d.get("start", 1.0), d.get("high", 4.0))
        return cls(d.get("variant", "euclidean"), int(d.get("dim", 3)), prof,
                   int(d.get("graph_depth", 40)))
