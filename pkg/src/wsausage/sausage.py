"""Occupancy-grid measurement of sausage volumes, occupation times and
graph ranges.

A grid cell with integer index ``i`` covers ``[i h, (i+1) h)`` per axis and is
counted once its center lies within eps of a sampled path point.  The volume
is the sum over counted cells of ``density(center) * h**dim``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import _kernels as K
from .asymptotics import ball_volume
from .engines import SampledPath

Density = Union[None, float, Callable[[np.ndarray], np.ndarray]]


@dataclass
class SausageEstimate:
    value: float
    eps: float
    t: float
    h: float
    dt: float
    bias_note: str = ""
    stderr: Optional[float] = None
    cells: int = 0


class OccupancyGrid:
    """Hash set of occupied cells with a running mu-weight.

    Cells are packed into int64 keys (``63 // dim`` bits per axis), so the
    grid has no bounding box; each axis index must stay within
    ``+-2**(63 // dim - 1)``.
    """

    def __init__(self, dim: int, h: float, density: Density = None):
        if dim < 1 or not h > 0:
            raise ValueError("need dim >= 1 and h > 0")
        self.dim = dim
        self.h = h
        self.density = density
        self._keys, self._vals, self._shift = K.table_new(10)
        self._count = 0
        self.weight = 0.0

    def __len__(self):
        return self._count

    def cell_of(self, x) -> np.ndarray:
        return np.floor(np.asarray(x, dtype=float) / self.h).astype(np.int64)

    def centers(self, cells) -> np.ndarray:
        return (np.asarray(cells, dtype=float) + 0.5) * self.h

    def _weights(self, cells: np.ndarray) -> np.ndarray:
        return cell_weights(self.centers(cells), self.h, self.density)

    def add_cells(self, cells, tag: int = 0) -> int:
        """Insert integer cells (n, dim); return the number that were new."""
        cells = np.atleast_2d(np.asarray(cells, dtype=np.int64))
        if cells.shape[1] != self.dim:
            raise ValueError("cells have the wrong dimension")
        keys = K.pack_cells(cells)
        self._keys, self._vals, self._shift, self._count, added = \
            K.table_insert_many(self._keys, self._vals, self._shift,
                                self._count, keys, tag)
        if added.any():
            self.weight += float(self._weights(cells[added]).sum())
        return int(added.sum())

    def add_keys(self, keys: np.ndarray, tag: int = 0) -> np.ndarray:
        self._keys, self._vals, self._shift, self._count, added = \
            K.table_insert_many(self._keys, self._vals, self._shift,
                                self._count, np.asarray(keys, dtype=np.int64), tag)
        if added.any():
            cells = K.unpack_cells(keys[added], self.dim)
            self.weight += float(self._weights(cells).sum())
        return added

    def stamp_ball(self, center, eps: float, tag: int = 0) -> int:
        """Insert all cells whose center is within eps of ``center``."""
        c = np.asarray(center, dtype=float)
        lo = np.ceil((c - eps) / self.h - 0.5).astype(np.int64)
        hi = np.floor((c + eps) / self.h - 0.5).astype(np.int64)
        axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
        cells = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, self.dim)
        d2 = (((cells + 0.5) * self.h - c) ** 2).sum(axis=1)
        return self.add_cells(cells[d2 <= eps * eps], tag)

    def contains(self, cells) -> np.ndarray:
        cells = np.atleast_2d(np.asarray(cells, dtype=np.int64))
        return K.table_contains(self._keys, self._shift, K.pack_cells(cells))

    def cells(self) -> np.ndarray:
        keys, _ = K.table_items(self._keys, self._vals, self._count)
        return K.unpack_cells(np.sort(keys), self.dim)

    def volume(self) -> float:
        return self.weight


def cell_weights(centers: np.ndarray, h: float, density: Density) -> np.ndarray:
    dim = centers.shape[-1]
    vol = h ** dim
    if density is None:
        return np.full(centers.shape[0], vol)
    if np.isscalar(density):
        return np.full(centers.shape[0], vol * float(density))
    return vol * np.asarray(density(centers), dtype=float)


def _check_grid(path: SampledPath, eps: float, h: float) -> None:
    if path.space.is_graph:
        raise ValueError("sausage volumes are for paths in R^d")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 0 < h <= eps / 4.0 * (1 + 1e-12):
        raise ValueError("cell size h must satisfy 0 < h <= eps/4")
    if path.points.shape[0] == 0:
        raise ValueError("empty path")
    if path.points.shape[1] >= 2 and path.step > (eps / 10.0) ** 2 * (1 + 1e-9):
        warnings.warn("dt exceeds (eps/10)^2; hitting bias may be large", stacklevel=3)


def default_skip(h: float) -> float:
    """Stamping is skipped while the path stays within this distance of the
    last stamped point."""
    return 0.125 * h


def _density_for(path: SampledPath, density: Density) -> Density:
    if density is not None:
        return density
    c = path.space.constant_density()
    if c is None:
        return path.space.density
    return None if c == 1.0 else c


def sausage_cells(path: SampledPath, eps: float, h: float, stop_indices,
                  skip: Optional[float] = None):
    """Packed keys of covered cells and the index of the stop at which each
    was first covered (dim >= 2)."""
    stops = np.asarray(stop_indices, dtype=np.int64)
    sk = default_skip(h) if skip is None else skip
    keys, buckets, _ = K.sausage_cells(path.points, float(eps), float(h), float(sk), stops)
    return keys, buckets


def sausage_volumes(path: SampledPath, eps: float, h: float, times,
                    density: Density = None, skip: Optional[float] = None) -> np.ndarray:
    """Nested sausage volumes at each of ``times`` from a single pass."""
    _check_grid(path, eps, h)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending")
    stops = np.array([path.index_at(t) for t in times], dtype=np.int64)
    return _volumes_at(path, eps, h, stops, _density_for(path, density), skip)


def _volumes_at(path, eps, h, stops, density, skip=None) -> np.ndarray:
    dim = path.points.shape[1]
    if dim == 1:
        # a continuous path fills the gaps between samples, so the 1-d
        # sausage is the hull of the samples padded by eps on both sides
        counts = K.interval_sausage_1d(path.points[:, 0], float(eps), float(h), stops)
        w = h if density is None else h * float(density if np.isscalar(density) else 1.0)
        return counts * w
    keys, buckets = sausage_cells(path, eps, h, stops, skip)
    if density is None:
        w = np.bincount(buckets, minlength=stops.size) * h ** dim
    elif np.isscalar(density):
        w = np.bincount(buckets, minlength=stops.size) * (h ** dim * float(density))
    else:
        centers = (K.unpack_cells(keys, dim) + 0.5) * h
        w = np.bincount(buckets, weights=cell_weights(centers, h, density),
                        minlength=stops.size)
    return np.cumsum(w)


def _note(h: float, dt: float, skip: float) -> str:
    return (f"grid band O(h) with h={h:g}; grid-time monitoring with dt={dt:g}; "
            f"stamp skip {skip:g}")


def sausage_volume(path: SampledPath, eps: float, h: float, density: Density = None,
                   skip: Optional[float] = None) -> SausageEstimate:
    """mu-volume of the eps-sausage of the whole path."""
    v = sausage_volumes(path, eps, h, [path.total_time], density, skip)[-1]
    sk = default_skip(h) if skip is None else skip
    return SausageEstimate(float(v), eps, path.total_time, h, path.step,
                           _note(h, path.step, sk))


def sausage_window(path: SampledPath, s: float, t: float, eps: float, h: float,
                   density: Density = None, skip: Optional[float] = None) -> SausageEstimate:
    """Sausage volume of the sub-path on ``[s, t]``."""
    if s > t:
        raise ValueError("need s <= t")
    if s < 0 or t > path.total_time + 1e-9 * path.step:
        raise ValueError("window outside the path horizon")
    i, j = path.index_at(s), path.index_at(t)
    sub = SampledPath(path.space, path.step, path.points[i:j + 1])
    v = sausage_volumes(sub, eps, h, [sub.total_time], density, skip)[-1]
    sk = default_skip(h) if skip is None else skip
    return SausageEstimate(float(v), eps, t - s, h, path.step, _note(h, path.step, sk))


def window_increments(path: SampledPath, block: float, eps: float, h: float,
                      density: Density = None, skip: Optional[float] = None) -> np.ndarray:
    """``|W_{nb,(n+1)b} minus W_{0,nb}|`` for consecutive blocks of length ``b``.

    Entry 0 is the volume of the sausage at time 0 (a single ball).  The
    entries sum to the total volume because each cell is counted in the
    block where it is first covered.
    """
    nb = int(math.floor(path.total_time / block + 1e-9))
    times = np.concatenate([[0.0], block * np.arange(1, nb + 1)])
    v = sausage_volumes(path, eps, h, times, density, skip)
    return np.diff(v, prepend=0.0)


def occupation_time(path: SampledPath, center, radius: float,
                    t: Optional[float] = None) -> float:
    """``dt * #{grid times s < t : |X_s - center| < radius}`` (left Riemann sum)."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    stop = path.n_steps if t is None else path.index_at(t)
    c = np.asarray(center, dtype=float)
    return K.count_inside(path.points.astype(float, copy=False), c, radius, 0, stop) * path.step


def _check_graph(path: SampledPath) -> None:
    if not path.space.is_graph:
        raise ValueError("expected a gasket path")


def range_curve(path: SampledPath, steps) -> tuple[np.ndarray, np.ndarray]:
    """(distinct vertices visited, maximal visit count) after each of ``steps``."""
    _check_graph(path)
    stops = np.asarray(steps, dtype=np.int64)
    if stops.size == 0 or np.any(np.diff(stops) < 0) or stops[-1] > path.n_steps or stops[0] < 0:
        raise ValueError("steps must be ascending and within the path")
    return K.visit_stats(path.points, stops)


def graph_range(path: SampledPath) -> int:
    """Number of distinct vertices visited."""
    return int(range_curve(path, [path.n_steps])[0][0])


def max_visit_count(path: SampledPath) -> int:
    """Largest number of visits to a single vertex."""
    return int(range_curve(path, [path.n_steps])[1][0])


def single_ball_volume(dim: int, eps: float, density: float = 1.0) -> float:
    return density * ball_volume(dim, eps)
