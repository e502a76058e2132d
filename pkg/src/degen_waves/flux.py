"""Flux functions that are convex outside a degenerate interval [a, b] and
linear (here: identically zero) inside it.

All evaluators accept scalars or numpy arrays.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import QuadratureError, bisect_monotone, integrate

__all__ = [
    "FluxSpec",
    "ValidationReport",
    "builtin_degenerate_burgers",
    "custom_flux",
    "evaluate",
    "validate",
    "mollify",
    "mollifier",
    "lambda_inverse",
    "BUILTIN",
]

BUILTIN = "builtin_degenerate_burgers"
CUSTOM = "custom"

Evaluator = Callable[[np.ndarray], np.ndarray]

_CONTINUITY_TOL = 1e-10
_FLAT_TOL = 1e-12


@dataclass(frozen=True)
class FluxSpec:
    """Piecewise flux with degenerate interval ``[a, b]``.

    ``f``, ``df``, ``d2f`` (and optionally ``d3f``) are vectorised.  At a
    junction, ``d2f`` returns the one-sided limit from the convex side.
    ``lambda_inv`` inverts ``df`` on the convex branch ``u >= b``; when it
    is missing, :func:`lambda_inverse` falls back to bisection.
    """

    kind: str
    a: float
    b: float
    f: Evaluator
    df: Evaluator
    d2f: Evaluator
    d3f: Evaluator | None = None
    lambda_inv: Evaluator | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, u):
        return self.f(u)

    def lam(self, u):
        """Characteristic speed f'(u)."""
        return self.df(u)

    def to_config(self) -> dict:
        if self.kind != BUILTIN:
            raise ValueError(f"flux kind {self.kind!r} has no config representation")
        return {"kind": self.kind, **self.params}


def _bf(u):
    u = np.asarray(u, dtype=float)
    return np.where(u >= 0.0, 0.5 * u * u, 0.0)


def _bdf(u):
    return np.maximum(np.asarray(u, dtype=float), 0.0)


def _bd2f(u):
    return np.where(np.asarray(u, dtype=float) >= 0.0, 1.0, 0.0)


def _bd3f(u):
    return np.zeros_like(np.asarray(u, dtype=float))


def _binv(w):
    return np.maximum(np.asarray(w, dtype=float), 0.0)


def builtin_degenerate_burgers() -> FluxSpec:
    """``f(u) = u^2/2`` for ``u >= 0`` and ``0`` for ``u < 0``."""
    return FluxSpec(BUILTIN, -math.inf, 0.0, _bf, _bdf, _bd2f, _bd3f, _binv)


def custom_flux(f, df, d2f, a=0.0, b=0.0, d3f=None, lambda_inv=None) -> FluxSpec:
    """Wrap user evaluators.  ``a == b`` means no degenerate interval."""
    if a > b:
        raise ValueError("require a <= b")
    return FluxSpec(CUSTOM, float(a), float(b), f, df, d2f, d3f, lambda_inv)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def evaluate(flux: FluxSpec, u, order: int = 0):
    """``f(u)``, ``f'(u)`` or ``f''(u)`` for ``order`` 0, 1, 2."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("u must be finite")
    fn = (flux.f, flux.df, flux.d2f)[order]
    return _scalar_or_array(np.asarray(fn(arr), dtype=float))


@dataclass
class ValidationReport:
    violations: list[str]
    n_samples: int

    @property
    def ok(self) -> bool:
        return not self.violations


def _one_sided(fn, x, side, h=1e-6):
    # quadratic-accurate extrapolation of fn to x from one side
    return 2.0 * float(fn(x + side * h)) - float(fn(x + 2 * side * h))


def validate(flux: FluxSpec, u_lo: float, u_hi: float, n_samples: int = 101) -> ValidationReport:
    """Sampling audit of the structural assumptions on ``flux``.

    Violations are returned as report entries, never raised.
    """
    if not u_lo < u_hi:
        raise ValueError("require u_lo < u_hi")
    if n_samples < 3:
        raise ValueError("n_samples must be >= 3")
    u = np.linspace(u_lo, u_hi, n_samples)
    d2 = np.asarray(flux.d2f(u), dtype=float)
    out: list[str] = []

    outside = (u <= flux.a) | (u >= flux.b)
    inside = ~outside
    for ui, v in zip(u[outside & (d2 <= 0)], d2[outside & (d2 <= 0)]):
        out.append(f"f''({ui:.6g}) = {v:.3e} <= 0 outside [a, b]")
    for ui, v in zip(u[inside & (np.abs(d2) > _FLAT_TOL)], d2[inside & (np.abs(d2) > _FLAT_TOL)]):
        out.append(f"f''({ui:.6g}) = {v:.3e} != 0 inside (a, b)")

    if u_lo <= 0.0 <= u_hi:
        f0, df0 = float(flux.f(0.0)), float(flux.df(0.0))
        if abs(f0) > _CONTINUITY_TOL:
            out.append(f"f(0) = {f0:.3e} != 0")
        if abs(df0) > _CONTINUITY_TOL:
            out.append(f"f'(0) = {df0:.3e} != 0")

    for name, x in (("a", flux.a), ("b", flux.b)):
        if not (math.isfinite(x) and u_lo < x < u_hi):
            continue
        for label, fn in (("f", flux.f), ("f'", flux.df)):
            jump = abs(_one_sided(fn, x, -1) - _one_sided(fn, x, +1))
            if jump > _CONTINUITY_TOL * (1.0 + abs(float(fn(x)))):
                out.append(f"{label} discontinuous at {name}={x:.6g} (jump {jump:.3e})")
    return ValidationReport(out, n_samples)


def _bump_raw(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = np.abs(s) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
    return out


@functools.lru_cache(maxsize=1)
def _bump_mass() -> float:
    return integrate(lambda s: float(_bump_raw(s)), -1.0, 1.0, tol=1e-14).value


def mollifier(x, delta: float = 1.0):
    """Friedrichs mollifier ``rho_delta``: smooth, supported on [-delta, delta], unit mass."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return _bump_raw(np.asarray(x, dtype=float) / delta) / (delta * _bump_mass())


def mollify(flux: FluxSpec, delta: float, quad_tol: float = 1e-10) -> FluxSpec:
    """Flux whose evaluators compute ``rho_delta * f`` and its derivatives.

    Derivatives are mollified derivatives of ``f`` (valid since f is C^1 and
    f' is piecewise C^1).  Each value is an adaptive quadrature with the
    branch junctions passed as breakpoints.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not quad_tol > 0:
        raise ValueError("quad_tol must be positive")
    mass = _bump_mass()
    junctions = [x for x in (flux.a, flux.b) if math.isfinite(x)]

    def convolve(fn):
        def scalar(u):
            pts = [(u - x) / delta for x in junctions]

            def integrand(s):
                return float(_bump_raw(s)) * float(fn(u - delta * s)) / mass

            try:
                return integrate(integrand, -1.0, 1.0, tol=quad_tol, points=pts).value
            except QuadratureError as exc:
                raise QuadratureError(f"mollified flux quadrature failed at u={u!r}: {exc}") from exc

        def vec(u):
            arr = np.asarray(u, dtype=float)
            flat = np.array([scalar(float(x)) for x in arr.ravel()])
            return flat.reshape(arr.shape) if arr.ndim else float(flat[0])

        return vec

    d3f = convolve(flux.d3f) if flux.d3f is not None else None
    return FluxSpec(
        CUSTOM,
        flux.a,
        flux.b,
        convolve(flux.f),
        convolve(flux.df),
        convolve(flux.d2f),
        d3f,
        None,
        {"mollified_from": flux.kind, "delta": delta},
    )


def lambda_inverse(flux: FluxSpec, w, u_lo: float, u_hi: float, tol: float = 1e-12):
    """Invert ``f'`` on the convex branch: returns u in [u_lo, u_hi] with f'(u)=w.

    Uses the closed form when the flux supplies one, otherwise bisection to
    ``tol`` followed by one Newton polish.
    """
    w = np.asarray(w, dtype=float)
    if flux.lambda_inv is not None:
        return flux.lambda_inv(w)
    u = bisect_monotone(flux.df, w, u_lo, u_hi, tol=tol)
    d2 = np.asarray(flux.d2f(u), dtype=float)
    step = np.where(d2 > 0, (np.asarray(flux.df(u)) - w) / np.where(d2 > 0, d2, 1.0), 0.0)
    polished = np.clip(u - step, u_lo, u_hi)
    better = np.abs(flux.df(polished) - w) <= np.abs(flux.df(u) - w)
    return np.where(better, polished, u)
