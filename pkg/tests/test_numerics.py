import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degen_waves import flux, waves
from degen_waves.numerics import (
    DecayFitError,
    QuadratureError,
    RootFindError,
    TimeSeries,
    find_root_monotone,
    fit_decay,
    geometric_times,
    grid_lq_norm,
    integrate,
    integrate_edge_power,
)


def test_integrate_sine_cubed():
    r = integrate(lambda s: math.sin(s) ** 3, 0.0, math.pi / 2, tol=1e-13)
    assert abs(r.value - 2.0 / 3.0) < 1e-12
    assert r.abs_error_estimate >= 0
    assert r.evaluations > 0


def test_integrate_endpoint_singularity():
    r = integrate(lambda x: x**-0.5 if x > 0 else 0.0, 0.0, 1.0, tol=1e-10)
    assert abs(r.value - 2.0) < 1e-8


def test_integrate_contact_density_over_line():
    w = waves.barenblatt_constants(2.0, 1.0, -1.0, 0.0)
    r = integrate(lambda x: float(waves.contact_dux(w, 1.0, x)), -math.inf, math.inf, tol=1e-10)
    assert abs(r.value - 1.0) < 1e-8


def test_integrate_empty_and_errors():
    assert integrate(math.exp, 1.0, 1.0).value == 0.0
    with pytest.raises(ValueError):
        integrate(math.exp, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate(math.exp, 0.0, 1.0, tol=0.0)


def test_integrate_nonintegrable_reports_subinterval():
    with pytest.raises(QuadratureError, match="subinterval|x="):
        integrate(lambda x: 1.0 / x if x > 0 else 0.0, 0.0, 1.0, tol=1e-10)


def test_integrate_edge_power_strong_singularity():
    r = integrate_edge_power(lambda x: 1.0, 0.0, 1.0, -0.9)
    assert abs(r.value - 10.0) < 1e-9
    with pytest.raises(ValueError):
        integrate_edge_power(lambda x: 1.0, 0.0, 1.0, -1.0)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-3, 3), min_size=1, max_size=5),
    st.lists(st.floats(-3, 3), min_size=1, max_size=5),
    st.floats(-2, 2),
    st.floats(-2, 2),
)
def test_integrate_is_linear(c1, c2, a, b):
    f, g = np.polynomial.Polynomial(c1), np.polynomial.Polynomial(c2)
    tol = 1e-11
    lhs = integrate(lambda x: a * f(x) + b * g(x), -1.0, 2.0, tol=tol).value
    rhs = a * integrate(f, -1.0, 2.0, tol=tol).value + b * integrate(g, -1.0, 2.0, tol=tol).value
    assert abs(lhs - rhs) <= (1 + abs(a) + abs(b)) * tol * 10


def test_find_root_examples(composite):
    assert abs(find_root_monotone(lambda x: x - 0.3, 0.0, 1.0) - 0.3) < 1e-12
    bf = flux.builtin_degenerate_burgers()
    assert abs(find_root_monotone(lambda u: float(bf.df(u)) - 0.7, 0.0, 1.0) - 0.7) < 1e-12
    x = find_root_monotone(lambda s: float(waves.composite_eval(composite, 4.0, s)), -10.0, 10.0)
    assert abs(waves.composite_eval(composite, 4.0, x)) <= 1e-10


def test_find_root_requires_sign_change():
    with pytest.raises(RootFindError):
        find_root_monotone(lambda x: x + 5.0, 0.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-50, 50), st.floats(0.01, 20), st.floats(0.01, 20))
def test_find_root_stays_in_bracket(r, left, right):
    lo, hi = r - left, r + right
    x = find_root_monotone(lambda s: math.atan(s - r), lo, hi, dfn=lambda s: 1.0 / (1.0 + (s - r) ** 2))
    assert lo <= x <= hi
    assert abs(x - r) < 1e-9


def test_grid_lq_norm_examples():
    assert grid_lq_norm(np.full(101, 2.0)[:-1], 1, dx=0.01) == pytest.approx(2.0)
    assert grid_lq_norm(np.array([3.0, -3.0, 3.0, -3.0]), math.inf) == 3.0
    with pytest.raises(ValueError):
        grid_lq_norm(np.ones(3), 0.5, dx=1.0)
    with pytest.raises(ValueError):
        grid_lq_norm(np.ones(3), 2)


def test_grid_lq_norm_of_contact_density_is_mass():
    w = waves.barenblatt_constants(2.0, 1.0, -1.0, 0.0)
    for dx in (0.02, 0.01):
        x = np.arange(-4.0, 4.0 + dx / 2, dx)
        assert abs(grid_lq_norm(waves.contact_dux(w, 1.0, x), 1, dx) - 1.0) < 2 * dx**2


@settings(max_examples=40, deadline=None)
@given(st.floats(1.0, 6.0), st.floats(0.2, 3.0), st.floats(0.1, 5.0))
def test_lq_norm_bounded_by_sup_times_support(q, width, amp):
    dx = 0.01
    x = np.arange(-5.0, 5.0, dx)
    v = amp * np.maximum(1.0 - (x / width) ** 2, 0.0)
    measure = np.count_nonzero(v) * dx
    assert grid_lq_norm(v, q, dx) <= grid_lq_norm(v, math.inf) * measure ** (1.0 / q) * (1 + 1e-12)


def test_fit_decay_exact_power_law():
    t = geometric_times(1.0, 10.0)
    fit = fit_decay(TimeSeries(t, t**-0.5), 1.0, 10.0)
    assert abs(fit.slope + 0.5) < 1e-10
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.n_points >= 10


def test_fit_decay_constant_series():
    t = geometric_times(1.0, 100.0)
    assert abs(fit_decay(TimeSeries(t, np.full_like(t, 3.0)), 1.0, 100.0).slope) < 1e-12


def test_fit_decay_contact_sup_norm():
    w = waves.barenblatt_constants(2.0, 1.0, -1.0, 0.0)
    t = geometric_times(1.0, 1e4)
    v = np.array([waves.contact_norm(w, s, math.inf).value for s in t])
    assert abs(fit_decay(TimeSeries(t, v), 1.0, 1e4).slope + 1.0 / 3.0) < 0.02


def test_fit_decay_errors():
    t = np.arange(1.0, 5.0)
    with pytest.raises(DecayFitError):
        fit_decay(TimeSeries(t, t), 1.0, 4.0)
    t = np.arange(1.0, 10.0)
    with pytest.raises(DecayFitError):
        fit_decay(TimeSeries(t, t - 3.0), 1.0, 9.0)
    with pytest.raises(DecayFitError):
        fit_decay(TimeSeries(t, t), 5.0, 1.0)


def test_geometric_times_density():
    t = geometric_times(1.0, 1e3, per_decade=10)
    assert t[0] == 1.0 and t[-1] == pytest.approx(1e3)
    assert len(t) >= 31
    r = t[1:] / t[:-1]
    assert np.allclose(r, r[0])


def test_timeseries_requires_increasing_t():
    with pytest.raises(ValueError):
        TimeSeries(np.array([1.0, 1.0]), np.array([0.0, 0.0]))
    s = TimeSeries.from_pairs([(0.0, 1.0), (1.0, 2.0)], "x")
    assert s.entries == [(0.0, 1.0), (1.0, 2.0)]
