import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wsausage.space import (GASKET_ALPHA, GasketGraph, HeatKernelParams,
                            RadialMetricProfile, ScalingFunction, SpaceDescriptor,
                            gasket_neighbors, measure_density, metric_factor,
                            metric_factor_derivative, riemannian_distance_bound)

PROF = RadialMetricProfile((10.0, 20.0))


def smoothstep(u):
    return 6 * u ** 5 - 15 * u ** 4 + 10 * u ** 3


# --- scaling functions -------------------------------------------------------

def test_power_scaling_and_inverse():
    f = ScalingFunction.power(2.0, 3.0)
    assert f(2.0) == pytest.approx(12.0)
    assert f.inverse(12.0) == pytest.approx(2.0)
    assert f.kind == "pure-power"
    assert f.envelope == (2.0, 2.0)


def test_two_regime_continuous_at_one():
    f = ScalingFunction.two_regime(1.5, 2.5)
    assert f(1.0 - 1e-12) == pytest.approx(f(1.0 + 1e-12), rel=1e-9)
    assert f.envelope == (1.5, 2.5)
    r = np.geomspace(1e-3, 1e3, 200)
    assert np.all(np.diff(f(r)) > 0)
    assert np.allclose(f.inverse(f(r)), r)


def test_scaling_rejects_nonpositive():
    with pytest.raises(ValueError):
        ScalingFunction.power(0.0)
    with pytest.raises(ValueError):
        ScalingFunction.power(1.0, -1.0)


def test_heat_kernel_params_positive():
    V, phi = ScalingFunction.power(3.0), ScalingFunction.power(2.0)
    p = HeatKernelParams(V, phi, 1, 2, 3, 4)
    assert (p.alpha, p.beta) == (3.0, 2.0)
    with pytest.raises(ValueError):
        HeatKernelParams(V, phi, c7=0.0)


# --- metric factor -----------------------------------------------------------

def test_metric_factor_plateaus_and_connector():
    assert metric_factor(PROF, 5.0) == 1.0
    assert metric_factor(PROF, 15.0) == 4.0
    assert metric_factor(PROF, 9.5) == pytest.approx(2.5)
    assert metric_factor(PROF, 25.0) == 1.0
    assert metric_factor(PROF, 19.25) == pytest.approx(4.0 - 3.0 * smoothstep(0.25))


def test_metric_factor_zero_derivative_on_plateaus():
    r = np.array([0.0, 3.0, 8.99, 10.0, 15.0, 18.99, 20.0, 40.0])
    assert np.all(metric_factor_derivative(PROF, r) == 0.0)


def test_metric_factor_derivative_matches_finite_difference():
    r = np.linspace(9.01, 9.99, 25)
    h = 1e-6
    fd = (metric_factor(PROF, r + h) - metric_factor(PROF, r - h)) / (2 * h)
    assert np.allclose(metric_factor_derivative(PROF, r), fd, rtol=1e-5, atol=1e-7)


@given(st.floats(0.0, 60.0))
def test_metric_factor_bounds(r):
    g = metric_factor(PROF, r)
    assert 1.0 <= g <= 4.0


@given(st.lists(st.floats(1.0, 5.0), min_size=1, max_size=4))
def test_metric_factor_monotone_on_connectors(gaps):
    bps = tuple(np.cumsum(np.asarray(gaps) + 1.0))
    prof = RadialMetricProfile(bps)
    for k, R in enumerate(bps):
        g = metric_factor(prof, np.linspace(R - 1.0, R, 101))
        d = np.diff(g)
        assert np.all(d >= 0) if k % 2 == 0 else np.all(d <= 0)


def test_profile_validation():
    with pytest.raises(ValueError):
        RadialMetricProfile((0.5,))
    with pytest.raises(ValueError):
        RadialMetricProfile((5.0, 5.5))
    with pytest.raises(ValueError):
        RadialMetricProfile((), start=2.0)
    with pytest.raises(ValueError):
        metric_factor(PROF, -1.0)


def test_profile_support_and_infinity():
    inner = RadialMetricProfile((2.0,), start=4.0)
    assert metric_factor(inner, 0.5) == 4.0
    assert metric_factor(inner, 2.0) == 1.0
    assert inner.support_radius() == 2.0
    assert inner.value_at_infinity() == 1.0
    assert RadialMetricProfile((3.0,)).value_at_infinity() == 4.0


# --- density -----------------------------------------------------------------

def test_measure_density_examples():
    x = np.array([0.3, -1.2, 7.0])
    assert measure_density(RadialMetricProfile(), 3, x) == 1.0
    assert measure_density(RadialMetricProfile((), 4.0), 3, x) == pytest.approx(8.0)
    assert measure_density(RadialMetricProfile((), 4.0), 2, x[:2]) == pytest.approx(4.0)


@given(st.lists(st.floats(-30, 30), min_size=3, max_size=3), st.integers(2, 6))
def test_density_is_power_of_metric_factor(x, dim):
    x = np.resize(np.asarray(x), dim)
    g = metric_factor(PROF, float(np.linalg.norm(x)))
    assert measure_density(PROF, dim, x) == pytest.approx(g ** (dim / 2))


# --- Riemannian distance -----------------------------------------------------

@pytest.mark.parametrize("dim", [2, 3])
def test_distance_constant_metrics(dim):
    x = np.zeros(dim)
    y = np.zeros(dim)
    y[0] = 1.0
    mesh = 0.1
    d1 = riemannian_distance_bound(RadialMetricProfile(), dim, x, y, mesh)
    d4 = riemannian_distance_bound(RadialMetricProfile((), 4.0), dim, x, y, mesh)
    assert d1 == pytest.approx(1.0, abs=2 * mesh)
    assert d4 == pytest.approx(2.0, abs=4 * mesh)


def test_distance_two_sided_bound_random_pairs():
    rng = np.random.default_rng(3)
    prof = RadialMetricProfile((2.0, 4.0, 6.0))
    for _ in range(20):
        x, y = rng.uniform(-7, 7, (2, 2))
        d = float(np.linalg.norm(x - y))
        if d < 0.5:
            continue
        mesh = d / 12
        est = riemannian_distance_bound(prof, 2, x, y, mesh)
        # lattice anisotropy is relative; endpoint snapping is O(mesh)
        assert d * (1 - 1e-12) <= est <= 2 * d * 1.03 + 4 * math.sqrt(2) * mesh


def test_distance_rejects_coarse_mesh():
    with pytest.raises(ValueError):
        riemannian_distance_bound(RadialMetricProfile(), 2, [0, 0], [1, 0], 0.25)
    with pytest.raises(ValueError):
        riemannian_distance_bound(RadialMetricProfile(), 2, [0, 0], [0, 0], 0.1)


# --- gasket ------------------------------------------------------------------

def test_gasket_degrees():
    g = GasketGraph(12)
    assert g.degree((0, 0)) == 2
    assert sorted(gasket_neighbors(g, (0, 0))) == [(0, 1), (1, 0)]
    for v in [(1, 1), (2, 0), (3, 1), (4, 4), (5, 2)]:
        assert g.degree(v) == 4
    assert gasket_neighbors(g, (5, 2)) == gasket_neighbors(g, (5, 2))


def test_gasket_rejects_invalid_address():
    g = GasketGraph(12)
    for v in [(-1, 0), (3, 3), (0, 2 ** 12 + 1)]:
        assert not g.is_vertex(v)
        with pytest.raises(ValueError):
            g.neighbors(v)


def test_gasket_adjacency_symmetric():
    g = GasketGraph(10)
    d = g.distance_table(5)
    for a, b in zip(*np.nonzero(d >= 0)):
        for w in g.neighbors((a, b)):
            assert (int(a), int(b)) in g.neighbors(w)


def test_gasket_unit_edges():
    g = GasketGraph(10)
    for v in [(0, 0), (1, 1), (6, 2), (9, 6)]:
        p = g.embed(v)
        for w in g.neighbors(v):
            assert np.linalg.norm(g.embed(w) - p) == pytest.approx(1.0)


def test_gasket_ball_growth_exponent():
    g = GasketGraph(16)
    counts = [g.ball_count(2 ** k) for k in range(8)]
    ratios = [b / a for a, b in zip(counts, counts[1:])]
    assert abs(ratios[-1] - 3.0) < 0.01
    assert all(abs(b - 3) <= abs(a - 3) for a, b in zip(ratios, ratios[1:]))
    assert math.log(ratios[-1], 2) == pytest.approx(GASKET_ALPHA, abs=0.01)


# --- descriptors -------------------------------------------------------------

@pytest.mark.parametrize("space", [
    SpaceDescriptor.euclidean(3),
    SpaceDescriptor.radial(3, RadialMetricProfile((10.0, 20.0))),
    SpaceDescriptor.radial(2, RadialMetricProfile((2.0,), start=4.0)),
    SpaceDescriptor.gasket(30),
])
def test_descriptor_round_trip(space):
    assert SpaceDescriptor.from_dict(space.describe()) == space


def test_descriptor_validation():
    with pytest.raises(ValueError):
        SpaceDescriptor("radial", 1, RadialMetricProfile())
    with pytest.raises(ValueError):
        SpaceDescriptor("torus", 3)
    with pytest.raises(ValueError):
        SpaceDescriptor("gasket", 3)


def test_constant_density():
    assert SpaceDescriptor.euclidean(3).constant_density() == 1.0
    assert SpaceDescriptor.radial(3, RadialMetricProfile((), 4.0)).constant_density() == 8.0
    assert SpaceDescriptor.radial(3, PROF).constant_density() is None


@settings(deadline=None)
@given(st.floats(0.0, 30.0))
def test_descriptor_density_matches(r):
    sp = SpaceDescriptor.radial(3, PROF)
    x = np.array([r, 0.0, 0.0])
    assert sp.density(x) == pytest.approx(metric_factor(PROF, r) ** 1.5)
