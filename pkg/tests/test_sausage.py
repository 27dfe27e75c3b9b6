import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from wsausage import _kernels as K
from wsausage.asymptotics import ball_volume
from wsausage.engines import RngSpec, SampledPath, sample_bm_path, sample_gasket_walk
from wsausage.sausage import (OccupancyGrid, graph_range, max_visit_count,
                              occupation_time, range_curve, sausage_cells,
                              sausage_volume, sausage_volumes, sausage_window,
                              single_ball_volume, window_increments)
from wsausage.space import GasketGraph, RadialMetricProfile, SpaceDescriptor


def euclid_path(points, step=1e-3):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return SampledPath(SpaceDescriptor.euclidean(pts.shape[1]), step, pts)


def brute_cells(points, eps, h):
    """Cells whose center is within eps of some point, by enumeration."""
    out = set()
    for p in points:
        lo = np.ceil((p - eps) / h - 0.5).astype(int)
        hi = np.floor((p + eps) / h - 0.5).astype(int)
        axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
        cells = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(p))
        d2 = (((cells + 0.5) * h - p) ** 2).sum(axis=1)
        out.update(map(tuple, cells[d2 <= eps * eps]))
    return out


# --- single balls and simple shapes ------------------------------------------

def test_stationary_disk():
    h = 1 / 16
    v = sausage_volume(euclid_path([[0.0, 0.0], [0.0, 0.0]], 1e-4), 1.0, h).value
    assert v == pytest.approx(math.pi, abs=3 * h)


def test_capsule_volume():
    eps, L = 0.5, 2.0
    xs = np.linspace(0, L, 401)
    pts = np.column_stack([xs, np.zeros_like(xs), np.zeros_like(xs)]) + 0.013
    v = sausage_volume(euclid_path(pts), eps, eps / 8).value
    exact = math.pi * eps ** 2 * L + 4 / 3 * math.pi * eps ** 3
    assert exact == pytest.approx(2.0944, abs=1e-4)
    assert v == pytest.approx(exact, rel=0.03)


def test_point_in_plateau_four_metric():
    sp = SpaceDescriptor.radial(3, RadialMetricProfile((), 4.0))
    p = SampledPath(sp, 1e-4, np.zeros((2, 3)) + 0.01)
    v = sausage_volume(p, 1.0, 1 / 16).value
    assert v == pytest.approx(8 * 4 / 3 * math.pi, rel=0.03)


def test_variable_density_midpoint_rule():
    prof = RadialMetricProfile((3.0,))
    sp = SpaceDescriptor.radial(3, prof)
    p = SampledPath(sp, 1e-4, np.array([[0.0, 0.0, 0.0], [2.5, 0.0, 0.0]]))
    keys, _ = sausage_cells(p, 1.0, 0.125, [1], skip=0.0)
    centers = (K.unpack_cells(keys, 3) + 0.5) * 0.125
    expect = float(np.sum(sp.density(centers))) * 0.125 ** 3
    assert sausage_volume(p, 1.0, 0.125, skip=0.0).value == pytest.approx(expect, rel=1e-12)


def test_grid_preconditions():
    p = euclid_path([[0.0, 0.0], [0.1, 0.0]])
    with pytest.raises(ValueError):
        sausage_volume(p, 1.0, 0.3)
    with pytest.raises(ValueError):
        sausage_volume(p, -1.0, 0.1)
    with pytest.warns(UserWarning):
        sausage_volume(euclid_path([[0.0, 0.0], [0.1, 0.0]], step=0.1), 1.0, 0.25)
    gasket = sample_gasket_walk(GasketGraph(10), 5, RngSpec(0))
    with pytest.raises(ValueError):
        sausage_volume(gasket, 1.0, 0.25)


# --- kernel against brute force ----------------------------------------------

@pytest.mark.parametrize("dim", [2, 3, 4, 5, 6])
def test_kernel_matches_brute_force(dim):
    rng = np.random.default_rng(dim)
    n = 60 if dim < 5 else 12
    pts = np.cumsum(rng.standard_normal((n, dim)) * 0.15, axis=0)
    eps, h = 0.6, 0.6 / 4
    keys, _ = sausage_cells(euclid_path(pts), eps, h, [n - 1], skip=0.0)
    got = set(map(tuple, K.unpack_cells(keys, dim)))
    assert got == brute_cells(pts, eps, h)
    assert len(keys) == len(got)


def test_skip_only_drops_cells():
    rng = np.random.default_rng(5)
    pts = np.cumsum(rng.standard_normal((3000, 3)) * 0.02, axis=0)
    full, _ = sausage_cells(euclid_path(pts), 1.0, 0.125, [2999], skip=0.0)
    part, _ = sausage_cells(euclid_path(pts), 1.0, 0.125, [2999])
    assert set(part.tolist()) <= set(full.tolist())
    assert len(part) >= 0.98 * len(full)


def test_nested_stops_equal_truncated_paths():
    path = sample_bm_path(3, 2.0, 1e-3, RngSpec(3))
    times = [0.0, 0.3, 1.0, 1.7, 2.0]
    nested = sausage_volumes(path, 0.5, 0.5 / 8, times)
    for t, v in zip(times, nested):
        sub = SampledPath(path.space, path.step, path.points[: path.index_at(t) + 1])
        assert sausage_volumes(sub, 0.5, 0.5 / 8, [sub.total_time])[-1] == v


def test_one_dimensional_hull():
    rng = np.random.default_rng(1)
    x = np.cumsum(rng.standard_normal(500)) * 0.1
    p = euclid_path(x[:, None])
    eps, h = 0.1, 0.01
    v = sausage_volume(p, eps, h).value
    lo, hi = x.min() - eps, x.max() + eps
    n = np.floor(hi / h - 0.5) - np.ceil(lo / h - 0.5) + 1
    assert v == pytest.approx(n * h)
    assert v == pytest.approx(hi - lo, abs=2 * h)


# --- occupancy grid ----------------------------------------------------------

def test_grid_insert_idempotent():
    g = OccupancyGrid(3, 0.1)
    cells = np.array([[0, 0, 0], [1, 2, 3], [-4, 5, -6]])
    assert g.add_cells(cells) == 3
    w = g.volume()
    assert g.add_cells(cells[:2]) == 0
    assert g.volume() == w == pytest.approx(3e-3)
    assert len(g) == 3
    assert g.contains(cells).all()
    assert not g.contains([[9, 9, 9]]).any()
    assert np.array_equal(np.sort(g.cells(), axis=0), np.sort(cells, axis=0))


@pytest.mark.filterwarnings("ignore:dt exceeds")
def test_grid_ball_matches_kernel():
    g = OccupancyGrid(3, 0.125, density=8.0)
    g.stamp_ball([0.3, -0.2, 0.05], 1.0)
    p = SampledPath(SpaceDescriptor.radial(3, RadialMetricProfile((), 4.0)), 1.0,
                    np.array([[0.3, -0.2, 0.05]]))
    assert g.volume() == pytest.approx(sausage_volume(p, 1.0, 0.125).value)


@settings(deadline=None, max_examples=30)
@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=1,
                max_size=200))
def test_grid_accumulator_counts_distinct(cells):
    g = OccupancyGrid(2, 0.5)
    for c in cells:
        g.add_cells([c])
    assert g.volume() == pytest.approx(len(set(cells)) * 0.25)


# --- invariants --------------------------------------------------------------

def test_monotone_and_step_increment_bound():
    path = sample_bm_path(3, 0.4, 1e-2, RngSpec(8))
    eps, h = 1.0, 0.125
    v = sausage_volumes(path, eps, h, path.times, skip=0.0)
    inc = np.diff(v)
    assert np.all(inc >= 0)
    assert v[0] >= ball_volume(3, eps) * 0.95
    dx = np.linalg.norm(np.diff(path.points, axis=0), axis=1)
    bound = [ball_volume(3, eps + d + h * math.sqrt(3)) for d in dx]
    assert np.all(inc <= bound)


def test_determinism():
    path = sample_bm_path(3, 3.0, 1e-3, RngSpec(4))
    a = sausage_volume(path, 1.0, 0.125).value
    b = sausage_volume(path, 1.0, 0.125).value
    assert a == b


@pytest.mark.filterwarnings("ignore:dt exceeds")
def test_eps_monotone():
    path = sample_bm_path(3, 2.0, 1e-3, RngSpec(6))
    vals = [sausage_volume(path, e, 0.05).value for e in (0.2, 0.4, 0.6, 0.8, 1.0)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_grid_refinement_converges():
    path = sample_bm_path(3, 2.0, 1e-3, RngSpec(12))
    eps = 0.8
    hs = [eps / 4, eps / 8, eps / 16]
    vs = [sausage_volume(path, eps, h).value for h in hs]
    # perimeter band: (dV/deps) * h * sqrt(d) / 2 with dV/deps from the finest grid
    de = 0.05
    dvde = (sausage_volume(path, eps + de, hs[-1]).value
            - sausage_volume(path, eps - de, hs[-1]).value) / (2 * de)
    for k in range(2):
        band = dvde * hs[k] * math.sqrt(3) / 2
        assert abs(vs[k] - vs[k + 1]) < 4 * band
    assert abs(vs[1] - vs[2]) < abs(vs[0] - vs[1]) + dvde * hs[2]


def test_small_eps_dichotomy():
    vals = []
    for eps in (0.4, 0.2, 0.1, 0.05):
        dt = (eps / 10) ** 2
        mean = np.mean([sausage_volume(sample_bm_path(3, 1.0, dt, RngSpec(14, i)), eps,
                                       eps / 8).value for i in range(3)])
        vals.append(mean)
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.2 * vals[0]
    walk = sample_gasket_walk(GasketGraph(20), 1000, RngSpec(14))
    assert graph_range(walk) >= 2


# --- windows -----------------------------------------------------------------

def test_window_point_is_single_ball():
    path = sample_bm_path(3, 2.0, 1e-3, RngSpec(9))
    s = 1.2
    w = sausage_window(path, s, s, 1.0, 0.125).value
    g = OccupancyGrid(3, 0.125)
    g.stamp_ball(path.points[path.index_at(s)], 1.0)
    assert w == pytest.approx(g.volume())
    assert w == pytest.approx(single_ball_volume(3, 1.0), rel=0.05)


def test_window_full_equals_total():
    path = sample_bm_path(3, 2.0, 1e-3, RngSpec(10))
    assert sausage_window(path, 0.0, 2.0, 1.0, 0.125).value == \
        sausage_volume(path, 1.0, 0.125).value
    with pytest.raises(ValueError):
        sausage_window(path, 1.5, 1.0, 1.0, 0.125)


def test_window_increments_telescope():
    path = sample_bm_path(3, 4.0, 1e-3, RngSpec(13))
    inc = window_increments(path, 0.5, 1.0, 0.125)
    assert inc.size == 9
    assert np.all(inc >= 0)
    assert inc.sum() == sausage_volume(path, 1.0, 0.125).value


# --- occupation time ---------------------------------------------------------

def test_occupation_time_trivial():
    p = euclid_path(np.zeros((11, 3)), step=0.1)
    assert occupation_time(p, [5, 0, 0], 1.0) == 0.0
    assert occupation_time(p, [0, 0, 0], 1.0) == pytest.approx(p.total_time)


def test_occupation_time_quadrature_oracle():
    y, r, t, dt, n = np.array([1.5, 0.0, 0.0]), 0.5, 2.0, 1e-3, 3000
    occ = np.array([occupation_time(sample_bm_path(3, t, dt, RngSpec(17, i)), y, r)
                    for i in range(n)])
    # |X_s - y|^2 / s is noncentral chi-square(3, |y|^2 / s)
    f = lambda s: stats.ncx2.cdf(r * r / s, 3, 1.5 ** 2 / s)
    exact, _ = integrate.quad(f, 1e-12, t, limit=200)
    se = occ.std(ddof=1) / math.sqrt(n)
    assert abs(occ.mean() - exact) < 3 * se + dt


# --- gasket range and visits -------------------------------------------------

def gasket_path(vertices):
    return SampledPath(SpaceDescriptor.gasket(10), 1.0, np.asarray(vertices, dtype=np.int64))


def test_range_and_visits_trivial():
    p = gasket_path([[0, 0]])
    assert graph_range(p) == 1
    assert max_visit_count(p) == 1


def test_edge_oscillation_visits():
    m = 7
    p = gasket_path([[0, 0], [1, 0]] * m + [[0, 0]])
    assert p.n_steps == 2 * m
    assert max_visit_count(p) == m + 1
    assert graph_range(p) == 2


def test_range_at_most_steps_plus_one():
    w = sample_gasket_walk(GasketGraph(20), 3000, RngSpec(19))
    steps = [0, 1, 10, 100, 3000]
    r, m = range_curve(w, steps)
    assert np.all(r <= np.array(steps) + 1)
    assert np.all(np.diff(r) >= 0) and np.all(np.diff(m) >= 0)
    brute = [len({tuple(v) for v in w.points[: s + 1]}) for s in steps]
    assert r.tolist() == brute


def test_graph_checks():
    p = euclid_path([[0.0, 0.0]])
    with pytest.raises(ValueError):
        graph_range(p)
    with pytest.raises(ValueError):
        max_visit_count(p)
