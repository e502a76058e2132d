import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degen_waves import diagnostics as diag
from degen_waves import waves
from degen_waves.solver import (
    CFLError,
    Field,
    Grid1D,
    SolverConfig,
    SolverError,
    gaussian_perturbation,
    init_from_wave,
    interior_mass,
    run,
    stable_dt,
    step,
    write_checkpoint_csv,
)


def _cfg(**kw):
    base = dict(p=2.0, mu=1.0, u_minus=-1.0, u_plus=1.0, t_end=5.0, checkpoint_times=(5.0,))
    base.update(kw)
    return SolverConfig(**base)


def _steps(state, cfg, n):
    for _ in range(n):
        state = step(state, cfg, stable_dt(state, cfg))
    return state


# -- grid and initial data -----------------------------------------------------


def test_grid():
    g = Grid1D.from_spacing(-1.0, 1.0, 0.25)
    assert g.n == 8 and g.dx == 0.25
    assert g.x[0] == -1.0 and g.x[-1] == 1.0 and len(g.x) == 9
    with pytest.raises(ValueError):
        Grid1D(1.0, 0.0, 10)
    with pytest.raises(ValueError):
        Grid1D(0.0, 1.0, 3)


def test_field_rejects_nonfinite():
    g = Grid1D(0.0, 1.0, 8)
    with pytest.raises(SolverError) as e:
        Field(g, np.r_[np.zeros(4), np.nan, np.zeros(4)])
    assert e.value.x == pytest.approx(0.5)
    with pytest.raises(ValueError):
        Field(g, np.zeros(3))


def test_init_from_wave_monotone(composite):
    g = Grid1D.from_spacing(-20.0, 30.0, 0.1)
    u = init_from_wave(g, composite).values
    assert np.all(np.diff(u) >= 0)
    assert u.min() >= -1.0 and u.max() <= 1.0


def test_init_with_gaussian_perturbation(composite):
    g = Grid1D.from_spacing(-12.0, 12.0, 0.1)
    u = init_from_wave(g, composite, gaussian_perturbation(g, 0.3))
    assert abs(u.values[0] - (-1.0)) < 1e-8
    with pytest.raises(ValueError):
        init_from_wave(Grid1D.from_spacing(-2.0, 2.0, 0.1), composite, gaussian_perturbation(Grid1D.from_spacing(-2.0, 2.0, 0.1), 0.3))


@pytest.mark.parametrize("c", [-0.5, 0.7])
def test_constant_composite_gives_constant_field(c):
    g = Grid1D.from_spacing(-5.0, 5.0, 0.1)
    np.testing.assert_array_equal(init_from_wave(g, waves.make_composite(2.0, 1.0, c, c)).values, c)


# -- time step -----------------------------------------------------------------


def test_stable_dt_capped_on_flat_degenerate_state():
    cfg = _cfg(u_minus=-0.5, u_plus=-0.5, epsilon=0.0)
    g = Grid1D.from_spacing(-5.0, 5.0, 0.1)
    assert stable_dt(Field(g, np.full(g.n + 1, -0.5)), cfg) == cfg.dt_max


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 0.2), st.floats(1.2, 3.5), st.floats(0.1, 3.0))
def test_stable_dt_respects_both_cfl_bounds(dx, p, amp):
    cfg = _cfg(p=p, u_plus=amp)
    g = Grid1D.from_spacing(-5.0, 5.0, dx)
    u = Field(g, amp * np.tanh(g.x))
    dt = stable_dt(u, cfg)
    D = np.diff(u.values) / g.dx
    assert dt > 0
    assert dt * np.max(np.abs(cfg.flux.df(u.values))) <= cfg.cfl_advective * g.dx * (1 + 1e-12)
    assert dt * cfg.mu * p * np.max((D * D + cfg.epsilon) ** ((p - 1) / 2)) <= cfg.cfl_diffusive * g.dx**2 * (1 + 1e-12)


def test_step_rejects_unstable_dt(composite):
    g = Grid1D.from_spacing(-10.0, 10.0, 0.05)
    u = init_from_wave(g, composite)
    cfg = _cfg()
    with pytest.raises(CFLError):
        step(u, cfg, 2.0 * stable_dt(u, cfg))
    with pytest.raises(ValueError):
        step(u, cfg, 0.0)


@pytest.mark.parametrize("c", [-0.4, 0.0, 0.6])
@pytest.mark.parametrize("eps", [0.0, 1e-6, 1e-2])
def test_constant_states_are_stationary(c, eps):
    cfg = _cfg(u_minus=c, u_plus=c, epsilon=eps)
    g = Grid1D.from_spacing(-5.0, 5.0, 0.1)
    u0 = Field(g, np.full(g.n + 1, c))
    np.testing.assert_array_equal(_steps(u0, cfg, 50).values, u0.values)


# -- run -------------------------------------------------------------------------


def test_run_with_zero_end_time(composite):
    g = Grid1D.from_spacing(-10.0, 10.0, 0.1)
    u0 = init_from_wave(g, composite)
    out = run(_cfg(t_end=0.0, checkpoint_times=()), g, u0)
    assert len(out) == 1 and out[0][0] == 0.0
    np.testing.assert_array_equal(out[0][1].values, u0.values)


def test_run_lands_on_checkpoints_and_calls_observers(composite):
    g = Grid1D.from_spacing(-10.0, 15.0, 0.1)
    seen = []
    out = run(_cfg(t_end=1.0, checkpoint_times=(0.25, 0.5)), g, init_from_wave(g, composite),
              [lambda t, f: seen.append((t, f.t))])
    assert [t for t, _ in out] == [0.0, 0.25, 0.5, 1.0]
    assert seen == [(0.0, 0.0), (0.25, 0.25), (0.5, 0.5), (1.0, 1.0)]


def test_run_is_deterministic(composite):
    g = Grid1D.from_spacing(-10.0, 15.0, 0.1)
    u0 = init_from_wave(g, composite, gaussian_perturbation(g, 0.3))
    cfg = _cfg(t_end=1.0, checkpoint_times=(0.5, 1.0))
    a, b = run(cfg, g, u0), run(cfg, g, u0)
    for (ta, fa), (tb, fb) in zip(a, b):
        assert ta == tb
        assert fa.values.tobytes() == fb.values.tobytes()


def test_config_validation():
    with pytest.raises(ValueError, match="p must exceed 1"):
        _cfg(p=1.0)
    with pytest.raises(ValueError):
        _cfg(checkpoint_times=(2.0, 1.0))
    with pytest.raises(ValueError):
        _cfg(checkpoint_times=(6.0,))
    with pytest.raises(ValueError):
        _cfg(boundary="periodic")


@pytest.mark.parametrize("boundary", ["dirichlet", "composite"])
def test_scheme_mass_bookkeeping_per_step(composite, boundary):
    cfg = _cfg(boundary=boundary)
    g = Grid1D.from_spacing(-10.0, 15.0, 0.05)
    state = init_from_wave(g, composite, gaussian_perturbation(g, 0.3))
    m0 = interior_mass(state)
    for _ in range(300):
        prev = state
        state = step(state, cfg, stable_dt(state, cfg))
        assert abs((interior_mass(state) + state.outflow) - (interior_mass(prev) + prev.outflow)) < 1e-12
    assert abs(interior_mass(state) + state.outflow - m0) < 1e-11


def test_total_variation_does_not_increase(composite):
    cfg = _cfg()
    g = Grid1D.from_spacing(-15.0, 20.0, 0.05)
    state = init_from_wave(g, composite)
    tv = np.sum(np.abs(np.diff(state.values)))
    for _ in range(400):
        state = step(state, cfg, stable_dt(state, cfg))
        new = np.sum(np.abs(np.diff(state.values)))
        assert new <= tv + 1e-9
        tv = new


def test_pure_contact_is_reproduced():
    # u- = -1, u+ = 0: the flux vanishes on the data and the contact wave is exact
    cfg = _cfg(u_plus=0.0, t_end=2.0, checkpoint_times=(2.0,))
    c = cfg.composite()
    g = Grid1D.from_spacing(-10.0, 10.0, 0.02)
    out = run(cfg, g, init_from_wave(g, c))
    assert diag.deviation_sup(out[-1][1], c, 2.0) < 2e-3


def _run_to_5(composite, dx, eps=1e-6, x=(-20.0, 30.0)):
    cfg = _cfg(epsilon=eps, boundary="composite")
    g = Grid1D.from_spacing(x[0], x[1], dx)
    return run(cfg, g, init_from_wave(g, composite, gaussian_perturbation(g, 0.3)))[-1][1]


@pytest.mark.slow
def test_epsilon_consistency(composite):
    a = _run_to_5(composite, 0.05, 1e-6, (-40.0, 60.0))
    b = _run_to_5(composite, 0.05, 5e-7, (-40.0, 60.0))
    assert abs(diag.deviation_sup(a, composite, 5.0) - diag.deviation_sup(b, composite, 5.0)) < 1e-3
    assert np.max(np.abs(a.values - b.values)) < 1e-3


@pytest.mark.slow
def test_grid_convergence(composite):
    ref = _run_to_5(composite, 0.0125)
    errs = []
    for dx in (0.1, 0.05):
        u = _run_to_5(composite, dx)
        k = int(round(dx / 0.0125))
        errs.append(np.max(np.abs(u.values - ref.values[::k])))
    assert errs[0] / errs[1] >= 1.5


@pytest.mark.slow
def test_perturbation_mass_conserved_with_margin(composite):
    # the waves stay well inside [-40, 120] up to t = 100
    cfg = _cfg(t_end=100.0, checkpoint_times=(20.0, 50.0, 100.0))
    g = Grid1D.from_spacing(-40.0, 120.0, 0.05)
    out = run(cfg, g, init_from_wave(g, composite, gaussian_perturbation(g, 0.3)))
    m0 = diag.phi_mass(out[0][1], composite, 0.0)
    assert abs(m0 - 0.3 * np.sqrt(np.pi)) < 1e-6
    drift = max(abs(diag.phi_mass(f, composite, t) - m0) for t, f in out) / m0
    assert drift < 1e-6


@pytest.mark.xfail(strict=True, reason="the unperturbed composite already deviates by about 0.21 at t=5")
def test_unperturbed_deviation_at_t5_below_0p1(composite):
    cfg = _cfg(boundary="composite")
    g = Grid1D.from_spacing(-40.0, 60.0, 0.05)
    u = run(cfg, g, init_from_wave(g, composite))[-1][1]
    assert diag.deviation_sup(u, composite, 5.0) < 0.1


def test_checkpoint_csv(tmp_path, composite):
    g = Grid1D.from_spacing(-5.0, 5.0, 0.5)
    f = Field(g, waves.composite_eval(composite, 2.0, g.x) + 0.1, 2.0)
    path = tmp_path / "cp.csv"
    write_checkpoint_csv(path, f, composite)
    raw = path.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(raw.decode().splitlines()))
    assert rows[0] == ["t", "x", "u", "u_multi", "phi"]
    assert len(rows) == g.n + 2
    t, x, u, um, phi = map(float, rows[5])
    assert t == 2.0 and abs(phi - 0.1) < 1e-14 and abs(u - um - phi) < 1e-15
