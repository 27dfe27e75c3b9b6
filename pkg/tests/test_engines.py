import math

import numpy as np
import pytest
from scipy import stats

from wsausage.engines import (RngSpec, SampledPath, exit_time, hitting_time,
                              radial_drift, sample_bm_path, sample_gasket_walk,
                              sample_path, sample_radial_path)
from wsausage.experiments import hitting_probability
from wsausage.space import (GASKET_BETA, GasketGraph, RadialMetricProfile,
                            SpaceDescriptor)


def test_rng_spec_streams():
    a = RngSpec(42, 3).generator().standard_normal(5)
    b = RngSpec(42, 3).generator().standard_normal(5)
    c = RngSpec(42, 4).generator().standard_normal(5)
    d = RngSpec(43, 3).generator().standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
    assert RngSpec(42).child(3) == RngSpec(42, 3)
    with pytest.raises(ValueError):
        RngSpec(-1)
    with pytest.raises(ValueError):
        RngSpec(2 ** 64)


# --- Brownian motion ---------------------------------------------------------

def test_single_step_path():
    p = sample_bm_path(3, 1.0, 1.0, RngSpec(42))
    assert p.points.shape == (2, 3)
    assert np.all(p.points[0] == 0)
    z = RngSpec(42).generator().standard_normal((1, 3))
    assert np.array_equal(p.points[1], z[0])
    assert p.total_time == 1.0


def test_bm_reproducible_bitwise():
    a = sample_bm_path(2, 5.0, 0.01, RngSpec(7, 11)).points
    b = sample_bm_path(2, 5.0, 0.01, RngSpec(7, 11)).points
    assert a.tobytes() == b.tobytes()


def test_bm_rejects_bad_steps():
    with pytest.raises(ValueError):
        sample_bm_path(3, 1.0, 0.0, RngSpec(0))
    with pytest.raises(ValueError):
        sample_bm_path(3, 0.0, 0.1, RngSpec(0))


def test_bm_second_moment():
    dim, t, n = 3, 2.0, 10_000
    r2 = np.array([np.sum(sample_bm_path(dim, t, 0.5, RngSpec(1, i)).points[-1] ** 2)
                   for i in range(n)])
    se = r2.std(ddof=1) / math.sqrt(n)
    assert abs(r2.mean() - dim * t) < 3 * se


def test_bm_start_point():
    p = sample_bm_path(2, 1.0, 0.1, RngSpec(5), start=[3.0, -1.0])
    q = sample_bm_path(2, 1.0, 0.1, RngSpec(5))
    assert np.allclose(p.points - q.points, [3.0, -1.0])


def test_sampled_path_time_grid():
    p = sample_bm_path(1, 1.0, 0.25, RngSpec(0))
    assert np.allclose(p.times, [0, 0.25, 0.5, 0.75, 1.0])
    assert p.index_at(0.6) == 2
    assert p.index_at(10.0) == 4
    assert p.index_at(0.75) == 3


# --- radial metric -----------------------------------------------------------

def test_radial_identity_metric_equals_bm():
    prof = RadialMetricProfile()
    for i in range(5):
        a = sample_radial_path(3, prof, 2.0, 0.01, RngSpec(9, i)).points
        b = sample_bm_path(3, 2.0, 0.01, RngSpec(9, i)).points
        assert np.array_equal(a, b)


def test_radial_constant_metric_slows_time():
    prof = RadialMetricProfile((), 4.0)
    dim, t, n = 3, 2.0, 10_000
    r2 = np.array([np.sum(sample_radial_path(dim, prof, t, 0.5, RngSpec(2, i)).points[-1] ** 2)
                   for i in range(n)])
    se = r2.std(ddof=1) / math.sqrt(n)
    assert abs(r2.mean() - dim * t / 4) < 3 * se


def test_radial_constant_metric_ks():
    prof = RadialMetricProfile((), 4.0)
    n = 10_000
    a = np.array([np.linalg.norm(sample_radial_path(3, prof, 1.0, 0.05, RngSpec(3, i)).points[-1])
                  for i in range(n)])
    b = np.linalg.norm(np.random.default_rng(4).standard_normal((n, 3)) * math.sqrt(0.25), axis=1)
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_radial_drift():
    prof = RadialMetricProfile((10.0, 20.0))
    assert np.all(radial_drift(prof, 3, [0.0, 0.0, 0.0]) == 0)
    assert np.all(radial_drift(prof, 3, [5.0, 0.0, 0.0]) == 0)
    assert np.all(radial_drift(prof, 3, [0.0, 15.0, 0.0]) == 0)
    d = radial_drift(prof, 3, [9.5, 0.0, 0.0])
    # G(9.5) = 2.5, G'(9.5) = 3 * 30/16
    assert d[0] == pytest.approx(1 * 3 * 30 / 16 / (4 * 2.5 ** 2))
    assert np.all(radial_drift(prof, 2, [9.5, 0.0]) == 0)


def test_radial_path_warns_on_coarse_step():
    with pytest.warns(UserWarning):
        sample_radial_path(3, RadialMetricProfile((5.0,)), 1.0, 0.1, RngSpec(0))


def test_sample_path_dispatch():
    sp = SpaceDescriptor.radial(2, RadialMetricProfile((), 4.0))
    assert sample_path(sp, 1.0, 0.1, RngSpec(0)).space == sp
    g = sample_path(SpaceDescriptor.gasket(20), 50, 1.0, RngSpec(0))
    assert g.n_steps == 50


# --- gasket walk -------------------------------------------------------------

def test_gasket_first_step_uniform():
    g = GasketGraph(20)
    firsts = [tuple(sample_gasket_walk(g, 1, RngSpec(0, i)).points[1]) for i in range(4000)]
    k = sum(1 for f in firsts if f == (1, 0))
    assert set(firsts) == {(1, 0), (0, 1)}
    assert abs(k - 2000) < 3 * math.sqrt(1000)


def test_gasket_walk_stays_on_graph_and_deterministic():
    g = GasketGraph(20)
    w = sample_gasket_walk(g, 5000, RngSpec(11)).points
    assert np.array_equal(w, sample_gasket_walk(g, 5000, RngSpec(11)).points)
    for i in range(0, w.shape[0] - 1, 7):
        assert g.is_vertex(w[i])
        assert tuple(w[i + 1]) in g.neighbors(w[i])


def test_gasket_displacement_exponent():
    g = GasketGraph(30)
    ns = 2 ** np.arange(8, 17)
    walks = [sample_gasket_walk(g, int(ns[-1]), RngSpec(21, i)).points for i in range(100)]
    top = max(int(w.sum(axis=1).max()) for w in walks)
    table = g.distance_table(max(1, math.ceil(math.log2(top))))
    means = [np.mean([table[w[n, 0], w[n, 1]] for w in walks]) for n in ns]
    slope = np.polyfit(np.log(ns), np.log(means), 1)[0]
    assert slope == pytest.approx(1 / GASKET_BETA, abs=0.05)


# --- hitting and exit times --------------------------------------------------

def _line(n, step=1.0, start=-5.0):
    pts = np.column_stack([start + step * np.arange(n + 1), np.zeros(n + 1), np.zeros(n + 1)])
    return SampledPath(SpaceDescriptor.euclidean(3), 0.5, pts)


def test_hitting_time_straight_path():
    p = _line(10)
    # x = -5, -4, ...; first |x| < 1.5 at x = -1 (index 4)
    assert hitting_time(p, [0, 0, 0], 1.5) == 2.0
    assert hitting_time(p, [0, 30, 0], 1.0) is None


def test_hitting_time_start_inside():
    p = _line(10)
    assert hitting_time(p, [-5, 0, 0], 0.5) == 0.0
    assert hitting_time(p, [-5, 0, 0], 0.5, strict=True) is None
    assert hitting_time(p, [-5, 0, 0], 1.5, strict=True) == 0.5


def test_exit_time():
    p = _line(10, start=0.0)
    assert exit_time(p, 100.0) is None
    assert exit_time(p, 2.5) == 1.5
    jump = SampledPath(SpaceDescriptor.euclidean(1), 0.1, np.array([[0.0], [5.0]]))
    assert exit_time(jump, 1.0) == 0.1


def test_mean_exit_time_ball():
    dim, R, dt, n = 3, 1.0, 1e-4, 1500
    taus = []
    for i in range(n):
        tau = exit_time(sample_bm_path(dim, 4.0, dt, RngSpec(31, i)), R)
        assert tau is not None
        taus.append(tau)
    taus = np.array(taus)
    se = taus.std(ddof=1) / math.sqrt(n)
    # grid monitoring overshoots by O(sqrt(dt))
    assert abs(taus.mean() - R ** 2 / dim) < 3 * se + 2 * math.sqrt(dt) * R


def test_hitting_probability_step_halving():
    sp = SpaceDescriptor.euclidean(3)
    x, y = np.zeros(3), np.array([2.0, 0, 0])
    n = 3000
    p1, s1 = hitting_probability(sp, x, y, 1.0, 5.0, n, 1e-3, seed=1)
    p2, s2 = hitting_probability(sp, x, y, 1.0, 5.0, n, 5e-4, seed=2)
    assert abs(p1 - p2) < 2 * math.hypot(s1, s2)
