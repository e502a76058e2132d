"""Explicit conservative finite-difference solver for

    u_t + f(u)_x = mu ((u_x^2 + eps)^((p-1)/2) u_x)_x

on a truncated interval with Dirichlet ends.

The advective flux is pure left-upwind, ``F_{i+1/2} = f(u_i)``, which is the
Godunov flux whenever ``f' >= 0`` (true for the builtin flux).  Time stepping
is forward Euler under the combined advective/diffusive CFL bound; with
``cfl_advective + 2 cfl_diffusive <= 1`` the update is monotone.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import waves
from .flux import FluxSpec, builtin_degenerate_burgers

__all__ = [
    "Grid1D",
    "Field",
    "SolverConfig",
    "SolverError",
    "CFLError",
    "BOUNDARY_MODES",
    "init_from_wave",
    "gaussian_perturbation",
    "stable_dt",
    "step",
    "run",
    "interior_mass",
    "write_checkpoint_csv",
]

BOUNDARY_MODES = ("dirichlet", "composite")
_TINY = 1e-300


class SolverError(RuntimeError):
    """Numerical failure; carries the time and grid location when known."""

    def __init__(self, message: str, t: float | None = None, x: float | None = None):
        super().__init__(message)
        self.t = t
        self.x = x


class CFLError(SolverError):
    pass


@dataclass(frozen=True)
class Grid1D:
    """Uniform node-centred grid with ``n`` cells and ``n + 1`` nodes."""

    x_left: float
    x_right: float
    n: int

    def __post_init__(self):
        if not self.x_left < self.x_right:
            raise ValueError("require x_left < x_right")
        if int(self.n) != self.n or self.n < 8:
            raise ValueError("n must be an integer >= 8")

    @classmethod
    def from_spacing(cls, x_left: float, x_right: float, dx: float) -> "Grid1D":
        n = int(round((x_right - x_left) / dx))
        return cls(float(x_left), float(x_right), n)

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_left, self.x_right, self.n + 1)


@dataclass(frozen=True)
class Field:
    """Node values on a grid at time ``t``.

    ``outflow`` is the cumulative mass that has left the interior nodes
    through the first and last cell faces, so that
    ``interior_mass(field) + field.outflow`` is constant along a run.
    """

    grid: Grid1D
    values: np.ndarray
    t: float = 0.0
    outflow: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n + 1,):
            raise ValueError(f"expected {self.grid.n + 1} values, got {v.shape}")
        if not np.all(np.isfinite(v)):
            i = int(np.flatnonzero(~np.isfinite(v))[0])
            raise SolverError(f"non-finite value at node {i}", self.t, float(self.grid.x[i]))
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x


def interior_mass(f: Field) -> float:
    """``sum u_i dx`` over interior nodes, the quantity the scheme telescopes."""
    return float(np.sum(f.values[1:-1]) * f.grid.dx)


@dataclass(frozen=True)
class SolverConfig:
    p: float
    mu: float
    u_minus: float
    u_plus: float
    epsilon: float = 1e-6
    flux: FluxSpec = field(default_factory=builtin_degenerate_burgers)
    cfl_advective: float = 0.5
    cfl_diffusive: float = 0.25
    t_end: float = 100.0
    checkpoint_times: tuple[float, ...] = (5.0, 10.0, 20.0, 50.0, 100.0)
    dt_max: float = 0.01
    boundary: str = "dirichlet"

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be nonnegative")
        if not 0 < self.cfl_advective <= 1:
            raise ValueError("cfl_advective must lie in (0, 1]")
        if not 0 < self.cfl_diffusive <= 0.5:
            raise ValueError("cfl_diffusive must lie in (0, 0.5]")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be nonnegative")
        if self.boundary not in BOUNDARY_MODES:
            raise ValueError(f"boundary must be one of {BOUNDARY_MODES}")
        cps = tuple(float(t) for t in self.checkpoint_times)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("checkpoint_times must be strictly ascending")
        if cps and (cps[0] < 0 or cps[-1] > self.t_end):
            raise ValueError("checkpoint_times must lie in [0, t_end]")
        object.__setattr__(self, "checkpoint_times", cps)

    def composite(self) -> waves.CompositeWave:
        return _composite_for(self.p, self.mu, self.u_minus, self.u_plus, self.flux)


_COMPOSITES: dict = {}


def _composite_for(p, mu, um, up, flux):
    key = (p, mu, um, up, id(flux))
    c = _COMPOSITES.get(key)
    if c is None:
        c = _COMPOSITES[key] = waves.make_composite(p, mu, um, up, flux)
    return c


def init_from_wave(grid: Grid1D, c: waves.CompositeWave, perturbation=None) -> Field:
    """``u0 = U~(0, x) + phi0(x)``; ``phi0`` must vanish (< 1e-8) at both ends."""
    base = np.asarray(waves.composite_eval(c, 0.0, grid.x), dtype=float)
    if perturbation is not None:
        phi = np.asarray(perturbation.values if isinstance(perturbation, Field) else perturbation, dtype=float)
        if phi.shape != base.shape:
            raise ValueError("perturbation does not match the grid")
        if abs(phi[0]) >= 1e-8 or abs(phi[-1]) >= 1e-8:
            raise ValueError(
                f"perturbation must vanish at the grid ends (|phi| = {abs(phi[0]):.3e}, {abs(phi[-1]):.3e})"
            )
        base = base + phi
    return Field(grid, base, 0.0)


def gaussian_perturbation(grid: Grid1D, amplitude: float, center: float = 0.0, width: float = 1.0) -> Field:
    """``amplitude * exp(-((x - center)/width)^2)``."""
    if not width > 0:
        raise ValueError("width must be positive")
    return Field(grid, amplitude * np.exp(-(((grid.x - center) / width) ** 2)))


def _diffusivity(D, p, eps):
    # (D^2 + eps)^((p-1)/2), with the common p = 2 case kept cheap
    s = D * D + eps
    return np.sqrt(s) if p == 2 else s ** (0.5 * (p - 1.0))


def stable_dt(state: Field, cfg: SolverConfig) -> float:
    """Largest admissible step for ``state``, never above ``cfg.dt_max``."""
    u = state.values
    dx = state.grid.dx
    speed = float(np.max(np.abs(cfg.flux.df(u))))
    D = np.diff(u) / dx
    nu = float(np.max(_diffusivity(D, cfg.p, cfg.epsilon))) if D.size else 0.0
    dt_a = cfg.cfl_advective * dx / max(speed, _TINY)
    dt_d = cfg.cfl_diffusive * dx * dx / max(cfg.mu * cfg.p * nu, _TINY)
    return min(dt_a, dt_d, cfg.dt_max)


def _boundary_values(cfg: SolverConfig, grid: Grid1D, t: float):
    if cfg.boundary == "dirichlet":
        return cfg.u_minus, cfg.u_plus
    ends = np.asarray(waves.composite_eval(cfg.composite(), t, np.array([grid.x_left, grid.x_right])))
    return float(ends[0]), float(ends[1])


def _advance(state: Field, cfg: SolverConfig, dt: float) -> Field:
    grid = state.grid
    u = state.values
    dx = grid.dx
    D = np.diff(u) / dx
    G = cfg.mu * _diffusivity(D, cfg.p, cfg.epsilon) * D
    F = np.asarray(cfg.flux.f(u[:-1]), dtype=float)
    H = F - G
    new = u.copy()
    new[1:-1] -= (dt / dx) * (H[1:] - H[:-1])
    t_new = state.t + dt
    new[0], new[-1] = _boundary_values(cfg, grid, t_new)
    bad = ~np.isfinite(new)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise SolverError(f"non-finite value at node {i} (x={grid.x[i]:.6g}, t={t_new:.6g})", t_new, float(grid.x[i]))
    return Field(grid, new, t_new, state.outflow + dt * float(H[-1] - H[0]))


def step(state: Field, cfg: SolverConfig, dt: float) -> Field:
    """One forward-Euler step; rejects ``dt`` above :func:`stable_dt`."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    limit = stable_dt(state, cfg)
    if dt > limit * (1.0 + 1e-12):
        raise CFLError(f"dt={dt:.6g} exceeds the stable step {limit:.6g} at t={state.t:.6g}", state.t)
    return _advance(state, cfg, dt)


Observer = Callable[[float, Field], None]


def run(cfg: SolverConfig, grid: Grid1D, u0: Field, observers: Sequence[Observer] = ()) -> list[tuple[float, Field]]:
    """Integrate to ``cfg.t_end``, landing exactly on each checkpoint.

    Returns ``[(t, Field)]`` for ``t = 0`` and every checkpoint; each
    observer is called with the same pairs as they are produced.
    """
    if u0.grid != grid:
        raise ValueError("u0 is not defined on grid")
    state = Field(grid, u0.values, 0.0, 0.0)
    targets = [t for t in cfg.checkpoint_times if t > 0]
    if cfg.t_end > 0 and (not targets or targets[-1] < cfg.t_end):
        targets.append(cfg.t_end)
    out = [(0.0, state)]
    for obs in observers:
        obs(0.0, state)
    for target in targets:
        while state.t < target:
            dt = stable_dt(state, cfg)
            remaining = target - state.t
            if dt >= remaining * (1.0 - 1e-12):
                dt = remaining
            state = _advance(state, cfg, dt)
            if dt == remaining:
                state = Field(grid, state.values, target, state.outflow)
        out.append((target, state))
        for obs in observers:
            obs(target, state)
    return out


def write_checkpoint_csv(path, state: Field, c: waves.CompositeWave) -> None:
    """Columns ``t, x, u, u_multi, phi`` with ``u_multi`` the composite state."""
    x = state.grid.x
    ref = np.asarray(waves.composite_eval(c, state.t, x), dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "u", "u_multi", "phi"])
        for xi, ui, ri in zip(x, state.values, ref):
            w.writerow([repr(float(state.t)), repr(float(xi)), repr(float(ui)), repr(float(ri)), repr(float(ui - ri))])
