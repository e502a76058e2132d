import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degen_waves import diagnostics as diag
from degen_waves import waves
from degen_waves.numerics import TimeSeries, integrate
from degen_waves.solver import Field, Grid1D, gaussian_perturbation

GRID = Grid1D.from_spacing(-30.0, 40.0, 0.02)


def _field(c, t, phi=0.0):
    return Field(GRID, waves.composite_eval(c, t, GRID.x) + phi, t)


def test_deviation_sup(composite):
    assert diag.deviation_sup(_field(composite, 3.0), composite) <= 1e-14
    bump = 0.2 * np.exp(-((GRID.x - 1.0) ** 2))
    assert diag.deviation_sup(_field(composite, 3.0, bump), composite) == pytest.approx(0.2, abs=1e-6)


def test_phi_mass(composite):
    g = gaussian_perturbation(GRID, 0.3).values
    assert diag.phi_mass(_field(composite, 2.0, g), composite) == pytest.approx(0.3 * math.sqrt(math.pi), abs=1e-10)


def test_energy_G_examples(composite):
    assert diag.energy_G(_field(composite, 3.0), composite) == 0.0
    # synthetic monotone state staying above 0.2: only the first region contributes
    x = np.linspace(-10, 10, 20001)
    dx = x[1] - x[0]
    U = 0.2 + 1.0 / (1.0 + np.exp(-x))
    dU = np.gradient(U, dx)
    g = diag.energy_G_arrays(np.full_like(x, 0.1), U, dU, dx)
    assert g == pytest.approx(0.01 * (U[-1] - U[0]), rel=1e-3)


def test_energy_G_regions():
    U = np.array([-1.0, -0.5, 0.5, 1.0])
    phi = np.array([0.0, 1.0, -1.0, 0.0])
    dU = np.ones(4)
    # node 1: U<0, U+phi>=0 -> 0.5^2; node 2: U>=0 -> phi^2 = 1 and U+phi<0 -> (0.5+1)^2
    assert diag.energy_G_arrays(phi, U, dU, 1.0) == pytest.approx(0.25 + 1.0 + 2.25)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_energy_G_nonnegative(seed):
    c = waves.make_composite(2.0, 1.0, -1.0, 1.0)
    rng = np.random.default_rng(seed)
    g = Grid1D.from_spacing(-10.0, 15.0, 0.1)
    phi = rng.normal(0, rng.uniform(0.01, 2.0), g.n + 1)
    f = Field(g, waves.composite_eval(c, 2.0, g.x) + phi, 2.0)
    assert diag.energy_G(f, c) >= -1e-12


@pytest.mark.parametrize("t", [0.0, 1.0, 10.0, 1e3, 1e5])
def test_sign_change_residual(composite, t):
    X = diag.sign_change_X(composite, t)
    assert abs(waves.composite_eval(composite, t, X)) <= 1e-10
    w = composite.contact
    assert X < waves.support_halfwidth(w, t)


def test_sign_change_window(composite):
    w = composite.contact
    delta = 0.2
    for t in (1e4, 1e5, 1e6):
        s = (1.0 + t) ** (1.0 / 3.0)
        X = diag.sign_change_X(composite, t)
        assert (w.xi_edge - delta) * s < X < w.xi_edge * s


def test_sign_change_increasing(composite):
    xs = [diag.sign_change_X(composite, t) for t in np.linspace(1.0, 100.0, 40)]
    assert np.all(np.diff(xs) > 0)


def test_sign_change_requires_straddling_states():
    c = waves.make_composite(2.0, 1.0, 0.2, 1.0)
    with pytest.raises(ValueError):
        diag.sign_change_X(c, 1.0)


def test_interactions_nonnegative_and_I11_oracle(composite):
    for t in (1.0, 10.0, 100.0):
        r = diag.interaction_integrals(composite, t)
        assert r.I11 >= 0 and r.I12 >= 0 and r.I21 >= 0
        # left of X only U + U^r < 0 matters, where f' vanishes: I11 = int f'(U^r) U^r_x = U^r(X)^2/2
        ur = waves.smooth_rarefaction_eval(composite.rarefaction, t, r.X)
        assert r.I11 == pytest.approx(0.5 * ur**2, rel=1e-9, abs=1e-15)


def test_remainder_L1_matches_direct_quadrature(composite):
    t = 7.0
    hw = waves.support_halfwidth(composite.contact, t)
    direct = integrate(lambda x: abs(float(waves.remainder_Fp_tilde(composite, t, x))), -60.0, 80.0,
                       tol=1e-11, points=[-hw, diag.sign_change_X(composite, t), hw]).value
    assert diag.remainder_L1(composite, t) == pytest.approx(direct, rel=1e-8)


# -- inequalities --------------------------------------------------------------


def _gauss(x, a=1.0, c=0.0, s=1.0):
    return a * np.exp(-(((x - c) / s) ** 2))


X = np.linspace(-15, 15, 6001)
DX = X[1] - X[0]


def test_sobolev_gaussian():
    f = Field(Grid1D(-15.0, 15.0, 6000), _gauss(X))
    rep = diag.check_sobolev(f, 2.0)
    assert rep.max_ratio < 1 and rep.passed and rep.trials == 1


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_sobolev_scale_and_translation_invariance(p):
    base = diag.sobolev_ratio(_gauss(X), p, DX)
    assert abs(diag.sobolev_ratio(3.0 * _gauss(X), p, DX) - base) < 1e-10 * base
    assert abs(diag.sobolev_ratio(_gauss(X, c=2.5), p, DX) - base) < 1e-10 * base


def test_sobolev_zero_field_excluded():
    g = Grid1D(-15.0, 15.0, 6000)
    rep = diag.check_sobolev([Field(g, np.zeros(6001)), Field(g, _gauss(X))], 2.0)
    assert rep.excluded == 1 and rep.trials == 1
    with pytest.raises(ValueError):
        diag.check_sobolev([Field(g, np.zeros(6001))], 2.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.2, 4.0), st.floats(-3, 3), st.floats(0.3, 3.0), st.floats(-2, 2), st.floats(0.3, 2.0))
def test_sobolev_random_bumps(p, a1, s1, a2, s2):
    v = _gauss(X, a1, -2.0, s1) + _gauss(X, a2, 3.0, s2)
    if np.max(np.abs(v)) < 1e-6:
        return
    assert diag.sobolev_ratio(v, p, DX) <= 1.0 + diag.SOBOLEV_SLACK


def test_interpolation_invariance():
    g = Grid1D(-15.0, 15.0, 6000)
    rep = diag.check_interpolation(Field(g, _gauss(X)), 2.0, 3.0, amplitudes=(2.0,), stretches=(1.0, 2.0))
    assert rep.passed and rep.trials == 2
    assert abs(rep.max_ratio - 1.0) < 1e-8
    with pytest.raises(ValueError):
        diag.interpolation_ratio(_gauss(X), 3.0, 1.5, DX)


def test_interpolation_resampled_stretch_converges():
    # resampling a stretched bump on a finer grid approaches exact invariance
    base = diag.interpolation_ratio(_gauss(X), 2.0, 3.0, DX)
    errs = []
    for n in (601, 6001):
        x = np.linspace(-15, 15, n)
        errs.append(abs(diag.interpolation_ratio(_gauss(x, s=0.5), 2.0, 3.0, x[1] - x[0]) / base - 1.0))
    assert errs[1] < errs[0]
    assert errs[1] < 1e-3


def test_boundary_interp():
    g = Grid1D(-15.0, 15.0, 6000)
    assert math.isnan(diag.boundary_interp_ratio(np.tanh(X), 2.0, DX))
    with pytest.raises(ValueError):
        diag.check_boundary_interp(Field(g, np.tanh(X)), 2.0)
    dip = 1.0 - _gauss(X)
    rep = diag.check_boundary_interp([Field(g, dip), Field(g, np.tanh(X))], 2.0)
    assert rep.passed and rep.excluded == 1
    r1 = diag.boundary_interp_ratio(dip, 2.0, DX)
    r2 = diag.boundary_interp_ratio(2.0 * dip, 2.0, DX)
    assert abs(r1 - r2) < 1e-12 * r1


def test_max_principle_bound():
    assert diag.max_principle_bound(np.zeros(5), -1.0, 1.0) == 4.0
    assert diag.max_principle_bound(np.array([0.1, -0.5, 0.2]), 0.0, 0.0) == 0.5


# -- time series ---------------------------------------------------------------


def test_running_integral_and_growth():
    t = np.linspace(0.0, 4.0, 401)
    s = TimeSeries(t, np.exp(-t))
    r = diag.running_integral(s)
    assert r.values[-1] == pytest.approx(1 - math.exp(-4.0), rel=1e-4)
    assert diag.final_fraction_growth(s) == pytest.approx((math.exp(-3) - math.exp(-4)) / (1 - math.exp(-4)), rel=1e-4)
    assert diag.final_fraction_growth(TimeSeries(t, np.zeros_like(t))) == 0.0


def test_timeseries_csv_round_trip(tmp_path):
    a = TimeSeries(np.array([0.0, 0.5, 1.0]), np.array([1.0, 1 / 3, -2e-17]), "alpha")
    b = TimeSeries(np.array([1.0, 2.0]), np.array([math.pi, 0.0]), "beta")
    path = tmp_path / "ts.csv"
    diag.write_timeseries_csv(path, [a, b])
    assert path.read_text().splitlines()[0] == "t,value,series_name"
    back = {s.name: s for s in diag.read_timeseries_csv(path)}
    for s in (a, b):
        np.testing.assert_array_equal(back[s.name].t, s.t)
        np.testing.assert_array_equal(back[s.name].values, s.values)


def test_recorder_collects_all_names(composite):
    rec = diag.DiagnosticsRecorder(composite)
    rec(0.0, _field(composite, 0.0, gaussian_perturbation(GRID, 0.3).values))
    rec(1.0, _field(composite, 1.0))
    for name in rec.NAMES:
        assert len(rec.series(name).values) == 2
    assert rec.series("deviation_sup").values[1] <= 1e-14
    assert rec.series("phi_mass").values[0] == pytest.approx(0.3 * math.sqrt(math.pi), abs=1e-10)
