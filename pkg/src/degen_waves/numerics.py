"""Shared numerical kernels: quadrature, monotone root finding, grid norms,
and log-log decay fits.

Quadrature and scalar root finding are thin wrappers over QUADPACK
(:func:`scipy.integrate.quad`) and Brent's method; the wrappers add the
error reporting and endpoint handling the rest of the package relies on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize as _optimize

__all__ = [
    "QuadratureError",
    "QuadratureResult",
    "RootFindError",
    "DecayFitError",
    "TimeSeries",
    "DecayFit",
    "integrate",
    "integrate_edge_power",
    "find_root_monotone",
    "bisect_monotone",
    "grid_lq_norm",
    "fit_decay",
    "geometric_times",
]

# geometric refinement levels toward a singular endpoint before giving up
_MAX_EDGE_LEVELS = 30


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class RootFindError(ValueError):
    """No sign change in the bracket, or the iteration failed."""


class DecayFitError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __float__(self) -> float:
        return self.value


def _quad(fn, lo, hi, tol, points=None, limit=200, rtol=0.0):
    kwargs = dict(epsabs=tol, epsrel=rtol, limit=limit, full_output=1)
    if points is not None and math.isfinite(lo) and math.isfinite(hi):
        inner = sorted(p for p in points if lo < p < hi)
        if inner:
            kwargs["points"] = inner
    out = _integrate.quad(fn, lo, hi, **kwargs)
    value, err, info = out[0], out[1], out[2]
    ier = 0 if len(out) == 3 else 1
    return float(value), float(abs(err)), int(info["neval"]), ier


def _geometric_edges(fn, lo, hi, tol):
    """Split [lo, hi] at the midpoint and refine geometrically toward both ends."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    total = 0.0
    err = 0.0
    nev = 0
    piece_tol = tol / (4 * _MAX_EDGE_LEVELS)
    for side in (-1, 1):
        edge = lo if side < 0 else hi
        last = math.inf
        for k in range(_MAX_EDGE_LEVELS):
            a = edge - side * half * 2.0 ** (-k)
            b = edge - side * half * 2.0 ** (-k - 1)
            a, b = (a, b) if a < b else (b, a)
            v, e, n, ier = _quad(fn, a, b, piece_tol)
            if ier:
                raise QuadratureError(
                    f"quadrature did not converge on subinterval [{a:.17g}, {b:.17g}]"
                )
            total += v
            err += e
            nev += n
            last = abs(v)
        if last > piece_tol:
            width = half * 2.0 ** (-_MAX_EDGE_LEVELS)
            raise QuadratureError(
                f"endpoint contribution still {last:.3e} after {_MAX_EDGE_LEVELS} "
                f"refinements; worst subinterval near x={edge:.17g} (width {width:.3e})"
            )
    return total, err, nev


def integrate(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    points: Sequence[float] | None = None,
    rtol: float = 0.0,
) -> QuadratureResult:
    """Adaptive Gauss-Kronrod quadrature of ``fn`` over ``[lo, hi]``.

    The estimate must satisfy ``err <= max(tol, rtol * |value|)``.
    Infinite limits are allowed.  ``points`` lists interior breakpoints
    (kinks, support edges).  If the global adaptive pass does not converge,
    the interval is re-split with geometric refinement toward both endpoints,
    which handles integrable algebraic endpoint singularities.

    Raises
    ------
    QuadratureError
        If neither pass reaches ``tol``.
    """
    if not (tol > 0):
        raise ValueError("tol must be positive")
    if lo > hi:
        raise ValueError("require lo <= hi")
    if lo == hi:
        return QuadratureResult(0.0, 0.0, 0)
    value, err, nev, ier = _quad(fn, lo, hi, tol, points, rtol=rtol)
    if ier == 0 and err <= max(tol, rtol * abs(value)):
        return QuadratureResult(value, err, nev)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise QuadratureError(
            f"quadrature over [{lo}, {hi}] did not converge (error estimate {err:.3e})"
        )
    # fall back to pieces between breakpoints, each refined toward its edges
    cuts = [lo] + sorted(p for p in (points or ()) if lo < p < hi) + [hi]
    total, total_err, total_nev = 0.0, 0.0, nev
    goal = max(tol, rtol * abs(value))
    for a, b in zip(cuts[:-1], cuts[1:]):
        v, e, n = _geometric_edges(fn, a, b, goal / (len(cuts) - 1))
        total += v
        total_err += e
        total_nev += n
    return QuadratureResult(total, total_err, total_nev)


def integrate_edge_power(
    fn: Callable[[float], float], lo: float, hi: float, beta: float, tol: float = 1e-12, rtol: float = 1e-10
) -> QuadratureResult:
    """``int_lo^hi fn(x) (hi - x)^beta dx`` for smooth ``fn`` and ``beta > -1``.

    The algebraic endpoint factor is integrated exactly by QUADPACK's QAWS
    rule, which is far more robust than refinement when ``beta`` is close to -1.
    """
    if not beta > -1:
        raise ValueError("beta must exceed -1")
    if lo == hi:
        return QuadratureResult(0.0, 0.0, 0)
    out = _integrate.quad(fn, lo, hi, weight="alg", wvar=(0.0, beta), epsabs=tol, epsrel=rtol, limit=200, full_output=1)
    value, err, info = out[0], abs(out[1]), out[2]
    if len(out) > 3 or err > max(tol, rtol * abs(value)):
        raise QuadratureError(f"weighted quadrature over [{lo}, {hi}] did not converge (error estimate {err:.3e})")
    return QuadratureResult(float(value), float(err), int(info["neval"]))


def find_root_monotone(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    dfn: Callable[[float], float] | None = None,
) -> float:
    """Root of a monotone scalar function on a sign-changing bracket.

    Brent's method to ``tol`` in x, followed by a single Newton polish when a
    derivative is supplied.  The result always lies in ``[lo, hi]``.
    """
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise RootFindError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo:.3e}, f(hi)={fhi:.3e}"
        )
    x = _optimize.brentq(fn, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
    if dfn is not None:
        d = dfn(x)
        if d != 0.0 and math.isfinite(d):
            x_new = x - fn(x) / d
            if lo <= x_new <= hi and abs(fn(x_new)) <= abs(fn(x)):
                x = x_new
    return float(min(max(x, lo), hi))


def bisect_monotone(
    fn: Callable[[np.ndarray], np.ndarray],
    target: np.ndarray,
    lo: np.ndarray | float,
    hi: np.ndarray | float,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> np.ndarray:
    """Elementwise bisection for ``fn(u) = target`` with ``fn`` increasing."""
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    if np.any(fn(lo) > target) or np.any(fn(hi) < target):
        raise RootFindError("target outside the image of the bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        below = fn(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= tol):
            break
    else:
        raise RootFindError("bisection did not reach tolerance")
    return 0.5 * (lo + hi)


def grid_lq_norm(values, q: float, dx: float | None = None) -> float:
    """Discrete Lq norm ``(sum |v_i|^q dx)^(1/q)``, or ``max |v_i|`` for q=inf.

    ``values`` may be a :class:`~degen_waves.solver.Field`, in which case the
    spacing is taken from its grid.
    """
    if hasattr(values, "values") and hasattr(values, "grid"):
        dx = values.grid.dx if dx is None else dx
        values = values.values
    v = np.abs(np.asarray(values, dtype=float))
    if math.isinf(q):
        return float(v.max()) if v.size else 0.0
    if q < 1:
        raise ValueError("q must be >= 1")
    if dx is None:
        raise ValueError("dx is required for finite q")
    return float((np.sum(v**q) * dx) ** (1.0 / q))


@dataclass(frozen=True)
class TimeSeries:
    """Scalar diagnostic trace, strictly increasing in t."""

    t: np.ndarray
    values: np.ndarray
    name: str = "value"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("t and values must be 1-d arrays of equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("t must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_pairs(cls, pairs, name="value"):
        pairs = list(pairs)
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]), name)

    @property
    def entries(self):
        return list(zip(self.t.tolist(), self.values.tolist()))

    def __len__(self):
        return self.t.size


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    n_points: int


def fit_decay(series: TimeSeries, t_min: float, t_max: float, offset: float = 0.0) -> DecayFit:
    """Least-squares line through ``(log(t + offset), log value)``.

    ``offset=1`` fits against ``1 + t``, the time variable of estimates of
    the form ``C (1+t)^(-a)``.
    """
    if not t_min < t_max:
        raise DecayFitError("require t_min < t_max")
    sel = (series.t >= t_min) & (series.t <= t_max)
    t, v = series.t[sel], series.values[sel]
    if t.size < 5:
        raise DecayFitError(f"need at least 5 samples in [{t_min}, {t_max}], got {t.size}")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise DecayFitError("values must be finite and positive")
    x = np.log(t + offset)
    y = np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return DecayFit(float(slope), float(intercept), r2, (float(t_min), float(t_max)), int(t.size))


def geometric_times(t_min: float, t_max: float, per_decade: int = 10) -> np.ndarray:
    """Points ``t_min * r**k`` with at least ``per_decade`` points per decade,
    ending exactly at ``t_max``."""
    if not 0 < t_min < t_max:
        raise ValueError("require 0 < t_min < t_max")
    decades = math.log10(t_max / t_min)
    n = max(5, int(math.ceil(decades * per_decade)) + 1)
    return np.geomspace(t_min, t_max, n)
