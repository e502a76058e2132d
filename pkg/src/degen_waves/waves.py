"""Nonlinear waves of the degenerate-viscosity conservation law.

* Barenblatt-type contact wave ``U`` for the p-Laplacian viscosity, whose
  x-derivative is the compactly supported porous-medium source solution
  ``v = tau^(-1/(p+1)) ((A - B xi^2) v 0)^(1/(p-1))``, ``xi = x tau^(-1/(p+1))``.
* Exact rarefaction fan ``u^r(x/t)`` and its smooth approximation ``U^r``
  built from the inviscid Burgers equation with tanh initial data.
* Composite state ``U(1+t, x) + U^r(t, x)`` and its residual in the PDE.

Every evaluator is vectorised over ``x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import flux as _flux
from .flux import FluxSpec
from .numerics import integrate, integrate_edge_power

__all__ = [
    "BarenblattError",
    "SupportEdgeError",
    "BarenblattWave",
    "SmoothRarefaction",
    "CompositeWave",
    "ContactNorm",
    "sine_power_integral",
    "barenblatt_B",
    "barenblatt_A",
    "barenblatt_constants",
    "contact_u",
    "contact_dux",
    "contact_d2ux",
    "contact_norm",
    "contact_flux_derivative_norm",
    "support_halfwidth",
    "rarefaction_exact",
    "smooth_rarefaction",
    "smooth_rarefaction_eval",
    "smooth_rarefaction_dux",
    "smooth_rarefaction_d2ux",
    "make_composite",
    "composite_eval",
    "composite_dux",
    "composite_d2ux",
    "u_multi",
    "remainder_Fp_tilde",
    "remainder_Fp",
]

_MASS_RTOL = 1e-8


class BarenblattError(ValueError):
    pass


class SupportEdgeError(ValueError):
    """Second derivative requested where the contact wave is not C^2."""


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


# ---------------------------------------------------------------------------
# contact wave


def sine_power_integral(m: float) -> float:
    """``int_0^{pi/2} sin(theta)^m dtheta = B((m+1)/2, 1/2) / 2``."""
    return 0.5 * float(special.beta(0.5 * (m + 1.0), 0.5))


def barenblatt_B(p: float, mu: float) -> float:
    return (p - 1.0) / (2.0 * mu * p * (p + 1.0))


def barenblatt_A(p: float, mu: float, mass: float) -> float:
    """Solve the mass identity ``2 A^((p+1)/(2(p-1))) B^(-1/2) S = mass`` for A.

    The mass enters squared; for unit mass this coincides with the
    first-power form.
    """
    s = sine_power_integral((p + 1.0) / (p - 1.0))
    return ((p - 1.0) * mass**2 / (8.0 * mu * p * (p + 1.0) * s * s)) ** ((p - 1.0) / (p + 1.0))


@dataclass(frozen=True)
class BarenblattWave:
    """Self-similar contact wave joining ``u_minus`` to ``u_plus``.

    Evaluated at ``tau = t + t_shift``.
    """

    p: float
    mu: float
    u_minus: float
    u_plus: float
    A: float
    B: float
    t_shift: float = 0.0

    @property
    def mass(self) -> float:
        return self.u_plus - self.u_minus

    @property
    def k(self) -> float:
        """Profile exponent 1/(p-1)."""
        return 1.0 / (self.p - 1.0)

    @property
    def xi_edge(self) -> float:
        return math.sqrt(self.A / self.B) if self.A > 0 else 0.0

    def tau(self, t: float) -> float:
        tau = float(t) + self.t_shift
        if not tau > 0:
            raise ValueError(f"need t + t_shift > 0, got {tau}")
        return tau

    def shifted(self, t_shift: float) -> "BarenblattWave":
        return BarenblattWave(self.p, self.mu, self.u_minus, self.u_plus, self.A, self.B, t_shift)


def _profile(w: BarenblattWave, xi):
    """``((A - B xi^2) v 0)^(1/(p-1))``."""
    base = np.maximum(w.A - w.B * np.asarray(xi, dtype=float) ** 2, 0.0)
    return base**w.k


def barenblatt_constants(
    p: float, mu: float, u_minus: float, u_plus: float, t_shift: float = 0.0, check: bool = True
) -> BarenblattWave:
    """Contact-wave constants ``A``, ``B`` for the given states.

    With ``check`` the closed-form ``A`` is cross-checked by quadrature of
    the profile, which must reproduce ``u_plus - u_minus``.
    """
    if not p > 1:
        raise BarenblattError("p must exceed 1")
    if not mu > 0:
        raise BarenblattError("mu must be positive")
    if not u_minus <= u_plus:
        raise BarenblattError("require u_minus <= u_plus")
    if not t_shift >= 0:
        raise BarenblattError("t_shift must be nonnegative")
    mass = u_plus - u_minus
    B = barenblatt_B(p, mu)
    A = barenblatt_A(p, mu, mass) if mass > 0 else 0.0
    w = BarenblattWave(float(p), float(mu), float(u_minus), float(u_plus), A, B, float(t_shift))
    if check and mass > 0:
        q = profile_mass(w)
        if abs(q - mass) > _MASS_RTOL * mass:
            raise BarenblattError(
                f"A/mass cross-check failed: quadrature gives {q!r}, expected {mass!r}"
            )
    return w


def profile_mass(w: BarenblattWave, tol: float = 1e-13) -> float:
    """Quadrature of the profile over its support (equals ``u_plus - u_minus``)."""
    if w.A == 0:
        return 0.0
    e = w.xi_edge
    half = integrate(lambda s: float(_profile(w, s)), 0.0, e, tol=tol)
    return 2.0 * half.value


def support_halfwidth(w: BarenblattWave, t: float) -> float:
    """``sqrt(A/B) * tau^(1/(p+1))``."""
    return w.xi_edge * w.tau(t) ** (1.0 / (w.p + 1.0))


def _xi(w, t, x):
    return np.asarray(x, dtype=float) * w.tau(t) ** (-1.0 / (w.p + 1.0))


def contact_dux(w: BarenblattWave, t: float, x):
    """``d/dx U``: the porous-medium source solution; zero off the support."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    tau = w.tau(t)
    return _out(tau ** (-1.0 / (w.p + 1.0)) * _profile(w, _xi(w, t, x)))


def _contact_u_beta(w, t, x):
    xi = _xi(w, t, x)
    if w.A == 0:
        return np.full_like(xi, w.u_minus)
    a = w.k + 1.0
    y = np.clip(0.5 * (1.0 + xi / w.xi_edge), 0.0, 1.0)
    # evaluate the smaller tail for accuracy near either far field
    left = w.u_minus + w.mass * special.betainc(a, a, y)
    right = w.u_plus - w.mass * special.betainc(a, a, 1.0 - y)
    return np.where(y <= 0.5, left, right)


def _contact_u_quad(w, t, x, tol=1e-12):
    xi = _xi(w, t, x)
    out = np.empty_like(xi)
    e = w.xi_edge
    for i, s in np.ndenumerate(xi):
        if w.A == 0 or s <= -e:
            out[i] = w.u_minus
        elif s >= e:
            out[i] = w.u_plus
        elif s <= 0:
            out[i] = w.u_minus + integrate(lambda z: float(_profile(w, z)), -e, s, tol=tol).value
        else:
            out[i] = w.u_plus - integrate(lambda z: float(_profile(w, z)), s, e, tol=tol).value
    return out


def contact_u(w: BarenblattWave, t: float, x, method: str = "beta"):
    """Contact wave ``U(t, x) = u_minus + int_{-inf}^x v dy``.

    In the similarity variable the integral is a regularized incomplete beta
    function (``method="beta"``); ``method="quad"`` integrates the profile
    adaptively instead.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    if method == "beta":
        return _out(_contact_u_beta(w, t, x))
    if method == "quad":
        return _out(_contact_u_quad(w, t, x))
    raise ValueError(f"unknown method {method!r}")


def _contact_d2ux_raw(w, t, x):
    """Analytic second derivative plus an inside/edge/outside classification."""
    tau = w.tau(t)
    xi = _xi(w, t, x)
    base = w.A - w.B * xi**2
    inside = base > 0
    gamma = (2.0 - w.p) / (w.p - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -(2.0 * w.B * xi / (w.p - 1.0)) * tau ** (-2.0 / (w.p + 1.0)) * np.where(
            inside, base, 1.0
        ) ** gamma
    edge = np.isclose(np.abs(xi), w.xi_edge, rtol=1e-14, atol=0.0) & ~inside if w.A > 0 else np.zeros_like(inside)
    return np.where(inside, val, 0.0), inside, edge, xi, tau


def contact_d2ux(w: BarenblattWave, t: float, x):
    """``d^2/dx^2 U`` strictly inside the open support.

    Raises :class:`SupportEdgeError` at or beyond the support edge; for
    ``p > 2`` the derivative is unbounded there.
    """
    x = np.asarray(x, dtype=float)
    val, inside, _, _, _ = _contact_d2ux_raw(w, t, x)
    if not np.all(inside):
        bad = x[~inside] if x.ndim else x
        raise SupportEdgeError(
            f"second derivative requested outside the open support at x={np.ravel(bad)[0]!r}"
        )
    return _out(val)


def _contact_d2ux_onesided(w, t, x):
    """Composite convention: zero outside the closed support, the inside limit
    at the edge when it is finite (p <= 2), an error when it is not."""
    x = np.asarray(x, dtype=float)
    val, inside, _, xi, tau = _contact_d2ux_raw(w, t, x)
    if w.A == 0:
        return np.zeros_like(x)
    on_edge = np.abs(np.abs(xi) - w.xi_edge) <= 1e-14 * max(1.0, w.xi_edge)
    on_edge &= ~inside
    if np.any(on_edge):
        if w.p > 2:
            raise SupportEdgeError(
                f"second derivative is unbounded at the support edge for p={w.p} "
                f"(x={np.ravel(x[on_edge])[0]!r})"
            )
        if w.p == 2:
            edge_val = -2.0 * w.B * xi * tau ** (-2.0 / 3.0)
            val = np.where(on_edge, edge_val, val)
    return val


@dataclass(frozen=True)
class ContactNorm:
    """Measured norm next to the closed-form prediction of the same quantity."""

    value: float
    predicted: float
    rate: float

    @property
    def relative_discrepancy(self) -> float:
        return abs(self.predicted - self.value) / abs(self.value) if self.value else math.inf


def contact_norm(
    w: BarenblattWave, t: float, q: float, deriv_order: int = 1, tol: float = 1e-15, rtol: float = 1e-11
) -> ContactNorm:
    """Lq norm of ``d/dx U`` or ``d^2/dx^2 U`` at time ``t``.

    ``value`` is adaptive quadrature over the support (or the exact maximum
    for ``q = inf``); ``predicted`` is the closed-form rate constant
    times ``tau^(-rate)``.  The two are reported side by side; they are not
    expected to agree for every (p, q).
    """
    if deriv_order not in (1, 2):
        raise ValueError("deriv_order must be 1 or 2")
    p = w.p
    if not (q >= 1):
        raise ValueError("q must be >= 1")
    if deriv_order == 2 and p > 2 and not q < (p - 1.0) / (p - 2.0):
        raise ValueError(f"q={q} outside the integrability range q < {(p - 1) / (p - 2)} for p={p}")
    tau = w.tau(t)
    A, B, k = w.A, w.B, w.k
    e = w.xi_edge
    hw = support_halfwidth(w, t)
    if A == 0:
        return ContactNorm(0.0, 0.0, 0.0)

    if deriv_order == 1:
        if math.isinf(q):
            rate = 1.0 / (p + 1.0)
            value = float(contact_dux(w, t, 0.0))
            predicted = (2.0 * A) ** k * tau**-rate
        else:
            rate = (q - 1.0) / ((p + 1.0) * q)
            half = integrate(lambda s: float(contact_dux(w, t, s)) ** q, 0.0, hw, tol=tol, rtol=rtol).value
            value = (2.0 * half) ** (1.0 / q)
            c1 = (
                2.0 * A ** ((p + 2.0 * q - 1.0) / (2.0 * (p - 1.0))) * B**-0.5
                * sine_power_integral(q / (p - 1.0))
            ) ** (1.0 / q)
            predicted = c1 * tau**-rate
        return ContactNorm(float(value), float(predicted), rate)

    gamma = (2.0 - p) / (p - 1.0)

    if math.isinf(q):
        rate = 2.0 / (p + 1.0)
        if gamma == 0:
            smax = e
        else:
            smax = math.sqrt(A / (B * (1.0 + 2.0 * gamma)))
        # the maximiser in xi; for p = 2 the sup is the one-sided edge value
        xs = smax * tau ** (1.0 / (p + 1.0)) * (1.0 - 1e-15)
        value = abs(float(_contact_d2ux_raw(w, t, xs)[0]))
        predicted = 2.0 * A ** (abs(p - 2.0) / (p - 1.0)) * B / (p - 1.0) * (B / A) ** -0.5 * tau**-rate
        return ContactNorm(float(value), float(predicted), rate)
    rate = (2.0 * q - 1.0) / ((p + 1.0) * q)
    if gamma < 0:
        # A - B xi^2 = B tau^(-2/(p+1)) (hw - x)(hw + x): pass the singular
        # factor (hw - x)^(gamma q) to a weighted rule
        s2 = tau ** (-2.0 / (p + 1.0))

        def smooth(x):
            d = 2.0 * B * x * tau ** (-1.0 / (p + 1.0)) / (p - 1.0) * s2
            return d**q * (B * s2 * (hw + x)) ** (gamma * q)

        half = integrate_edge_power(smooth, 0.0, hw, gamma * q, tol=tol, rtol=rtol).value
    else:
        half = integrate(
            lambda s: abs(float(_contact_d2ux_raw(w, t, s)[0])) ** q, 0.0, hw, tol=tol, rtol=rtol
        ).value
    value = (2.0 * half) ** (1.0 / q)
    c2 = (
        2.0 * (2.0 * A ** (-(p - 2.0) / (p - 1.0)) * B / (p - 1.0)) ** q
        * (B / A) ** (-(q + 1.0) / 2.0)
        * _sin_cos_integral(-2.0 * (p - 2.0) * q / (p - 1.0) + 1.0, q)
    ) ** (1.0 / q)
    return ContactNorm(float(value), float(c2 * tau**-rate), rate)


def _sin_cos_integral(a: float, b: float) -> float:
    """``int_0^{pi/2} sin^a cos^b = B((a+1)/2, (b+1)/2) / 2`` (a, b > -1)."""
    return 0.5 * float(special.beta(0.5 * (a + 1.0), 0.5 * (b + 1.0)))


def contact_flux_derivative_norm(w: BarenblattWave, t: float, tol: float = 1e-13) -> ContactNorm:
    """L2 norm of ``d/dx (|U_x|^(p-1) U_x)`` with its closed-form prediction."""
    p, A, B, k = w.p, w.A, w.B, w.k
    tau = w.tau(t)
    rate = (2.0 * p + 1.0) / (2.0 * (p + 1.0))
    if A == 0:
        return ContactNorm(0.0, 0.0, rate)
    # d/dx (U_x^p) = p U_x^(p-1) U_xx, evaluated in x at time t
    def h(x):
        return p * float(contact_dux(w, t, x)) ** (p - 1.0) * float(_contact_d2ux_raw(w, t, x)[0])

    half = integrate(lambda x: h(x) ** 2, 0.0, support_halfwidth(w, t), tol=tol).value
    value = math.sqrt(2.0 * half)
    c3 = math.sqrt(
        2.0 * (2.0 * B**p / (p - 1.0)) ** 2
        * (B / A) ** (-(3.0 * p - 7.0) / (2.0 * (p - 1.0)))
        * _sin_cos_integral((p + 3.0) / (p - 1.0), 2.0)
    )
    return ContactNorm(float(value), float(c3 * tau**-rate), rate)


# ---------------------------------------------------------------------------
# rarefaction waves


def _check_convex_states(flux: FluxSpec, u_minus: float, u_plus: float, allow_equal=False):
    if u_minus > u_plus or (u_minus == u_plus and not allow_equal):
        raise ValueError("require u_minus < u_plus")
    if u_minus == u_plus:
        return
    on_right = u_minus >= flux.b
    on_left = u_plus <= flux.a
    if not (on_right or on_left):
        raise ValueError(
            f"states [{u_minus}, {u_plus}] are not on a convex branch of the flux "
            f"(degenerate interval [{flux.a}, {flux.b}])"
        )


def rarefaction_exact(flux: FluxSpec, u_minus: float, u_plus: float, t: float, x):
    """Self-similar fan ``u^r(x/t)``: ``u_minus``, ``lambda^-1(x/t)``, ``u_plus``."""
    if not t > 0:
        raise ValueError("t must be positive")
    _check_convex_states(flux, u_minus, u_plus)
    x = np.asarray(x, dtype=float)
    lm, lp = float(flux.df(u_minus)), float(flux.df(u_plus))
    w = np.clip(x / t, lm, lp)
    u = _flux.lambda_inverse(flux, w, u_minus, u_plus)
    u = np.where(x <= lm * t, u_minus, np.where(x >= lp * t, u_plus, u))
    return _out(np.asarray(u, dtype=float))


@dataclass(frozen=True)
class SmoothRarefaction:
    """Smooth rarefaction ``U^r = lambda^-1(w)``, ``w`` the Burgers solution
    with data ``w0(x) = (l- + l+)/2 + (l+ - l-)/2 tanh x``."""

    flux: FluxSpec
    u_minus: float
    u_plus: float
    lambda_minus: float
    lambda_plus: float

    @property
    def trivial(self) -> bool:
        return self.u_minus == self.u_plus


def smooth_rarefaction(flux: FluxSpec, u_minus: float, u_plus: float) -> SmoothRarefaction:
    _check_convex_states(flux, u_minus, u_plus, allow_equal=True)
    lm, lp = float(flux.df(u_minus)), float(flux.df(u_plus))
    if u_minus < u_plus and not lm < lp:
        raise ValueError("characteristic speeds must increase across the rarefaction")
    return SmoothRarefaction(flux, float(u_minus), float(u_plus), lm, lp)


def _w0(sr, x0):
    # 1 + tanh(x) = 2 expit(2x), written to stay accurate in both tails
    d = sr.lambda_plus - sr.lambda_minus
    s, sb = special.expit(2.0 * x0), special.expit(-2.0 * x0)
    w = np.where(x0 <= 0, sr.lambda_minus + d * s, sr.lambda_plus - d * sb)
    dw = 2.0 * d * s * sb
    d2w = 2.0 * dw * (sb - s)
    return w, dw, d2w


class CharacteristicError(RuntimeError):
    pass


def _characteristic_foot(sr: SmoothRarefaction, t: float, x, tol: float = 1e-12, max_iter: int = 200):
    """Solve ``x = x0 + w0(x0) t`` for the foot ``x0`` (safeguarded Newton)."""
    x = np.asarray(x, dtype=float)
    if t == 0:
        return x.copy()
    lm, lp = sr.lambda_minus, sr.lambda_plus
    lo = x - lp * t - 1.0
    hi = x - lm * t + 1.0
    x0 = np.clip(x - 0.5 * (lm + lp) * t, lo, hi)
    scale = tol * np.maximum(1.0, np.maximum(np.abs(x), max(abs(lm), abs(lp)) * t))
    prev = hi - lo
    for _ in range(max_iter):
        w, dw, _ = _w0(sr, x0)
        g = x0 + w * t - x
        done = np.abs(g) <= scale
        if np.all(done):
            return x0
        lo = np.where(g < 0, x0, lo)
        hi = np.where(g > 0, x0, hi)
        slope = 1.0 + dw * t
        newton = x0 - g / slope
        # bisect when Newton leaves the bracket or fails to halve the last step
        bad = ~((newton > lo) & (newton < hi)) | (np.abs(2.0 * g) > np.abs(prev * slope))
        step = np.where(bad, 0.5 * (lo + hi), newton)
        prev = np.abs(step - x0)
        x0 = np.where(done, x0, step)
        if np.all(((hi - lo) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(x0))) | done):
            return x0
    raise CharacteristicError(f"characteristic equation not solved to tolerance at t={t}")


def _smooth_w(sr: SmoothRarefaction, t: float, x):
    if not t >= 0:
        raise ValueError("t must be nonnegative")
    x0 = _characteristic_foot(sr, t, x)
    w, dw0, d2w0 = _w0(sr, x0)
    denom = 1.0 + dw0 * t
    return w, dw0 / denom, d2w0 / denom**3


def _lambda_inv(sr, w):
    w = np.clip(w, sr.lambda_minus, sr.lambda_plus)
    return np.asarray(_flux.lambda_inverse(sr.flux, w, sr.u_minus, sr.u_plus), dtype=float)


def smooth_rarefaction_eval(sr: SmoothRarefaction, t: float, x):
    x = np.asarray(x, dtype=float)
    if sr.trivial:
        return _out(np.full_like(x, sr.u_minus))
    w, _, _ = _smooth_w(sr, t, x)
    return _out(_lambda_inv(sr, w))


def smooth_rarefaction_dux(sr: SmoothRarefaction, t: float, x):
    """``w_x / lambda'(U^r)`` with ``w_x = w0'(x0) / (1 + w0'(x0) t)``."""
    x = np.asarray(x, dtype=float)
    if sr.trivial:
        return _out(np.zeros_like(x))
    w, dw, _ = _smooth_w(sr, t, x)
    u = _lambda_inv(sr, w)
    return _out(dw / np.asarray(sr.flux.d2f(u), dtype=float))


def _d3f(flux, u, h=1e-5):
    if flux.d3f is not None:
        return np.asarray(flux.d3f(u), dtype=float)
    return (np.asarray(flux.d2f(u + h)) - np.asarray(flux.d2f(u - h))) / (2 * h)


def smooth_rarefaction_d2ux(sr: SmoothRarefaction, t: float, x):
    x = np.asarray(x, dtype=float)
    if sr.trivial:
        return _out(np.zeros_like(x))
    w, dw, d2w = _smooth_w(sr, t, x)
    u = _lambda_inv(sr, w)
    lp1 = np.asarray(sr.flux.d2f(u), dtype=float)
    return _out(d2w / lp1 - _d3f(sr.flux, u) * dw**2 / lp1**3)


# ---------------------------------------------------------------------------
# composite state


@dataclass(frozen=True)
class CompositeWave:
    """``U(t + t_shift, x - s t) + U^r(t, x) [+ U^r_left(t, x)]`` minus the
    junction states, so the far fields are the outer states.

    In the reduced case (flux zero on (-inf, 0), ``u_minus < 0 < u_plus``)
    this is ``U(1+t, x) + U^r(t, x)``.
    """

    contact: BarenblattWave
    rarefaction: SmoothRarefaction
    left_rarefaction: SmoothRarefaction | None = None
    contact_speed: float = 0.0

    def __post_init__(self):
        if self.contact.u_plus != self.rarefaction.u_minus:
            raise ValueError("contact.u_plus must equal rarefaction.u_minus")
        if self.left_rarefaction is not None and self.left_rarefaction.u_plus != self.contact.u_minus:
            raise ValueError("left_rarefaction.u_plus must equal contact.u_minus")

    @property
    def u_minus(self) -> float:
        lr = self.left_rarefaction
        return lr.u_minus if lr is not None else self.contact.u_minus

    @property
    def u_plus(self) -> float:
        return self.rarefaction.u_plus

    @property
    def flux(self) -> FluxSpec:
        return self.rarefaction.flux

    @property
    def p(self) -> float:
        return self.contact.p

    @property
    def mu(self) -> float:
        return self.contact.mu


def make_composite(p: float, mu: float, u_minus: float, u_plus: float, flux: FluxSpec | None = None,
                   t_shift: float = 1.0) -> CompositeWave:
    """Composite for ``u_minus <= u_plus`` around the degenerate interval of ``flux``."""
    flux = flux if flux is not None else _flux.builtin_degenerate_burgers()
    if u_minus > u_plus:
        raise ValueError("require u_minus <= u_plus")
    c_lo = min(max(u_minus, flux.a), u_plus)
    c_hi = max(min(u_plus, flux.b), c_lo)
    contact = barenblatt_constants(p, mu, c_lo, c_hi, t_shift=t_shift)
    right = smooth_rarefaction(flux, c_hi, u_plus)
    left = smooth_rarefaction(flux, u_minus, c_lo) if u_minus < c_lo else None
    speed = float(flux.df(flux.b)) if math.isfinite(flux.b) else 0.0
    return CompositeWave(contact, right, left, speed)


def _parts(c: CompositeWave, t: float, x):
    x = np.asarray(x, dtype=float)
    return x - c.contact_speed * t


def composite_eval(c: CompositeWave, t: float, x):
    """Composite state ``U~(t, x)``."""
    x = np.asarray(x, dtype=float)
    u = (
        np.asarray(contact_u(c.contact, t, _parts(c, t, x)))
        + np.asarray(smooth_rarefaction_eval(c.rarefaction, t, x))
        - c.rarefaction.u_minus
    )
    if c.left_rarefaction is not None:
        u = u + np.asarray(smooth_rarefaction_eval(c.left_rarefaction, t, x)) - c.contact.u_minus
    return _out(u)


def composite_dux(c: CompositeWave, t: float, x):
    x = np.asarray(x, dtype=float)
    d = np.asarray(contact_dux(c.contact, t, _parts(c, t, x))) + np.asarray(
        smooth_rarefaction_dux(c.rarefaction, t, x)
    )
    if c.left_rarefaction is not None:
        d = d + np.asarray(smooth_rarefaction_dux(c.left_rarefaction, t, x))
    return _out(d)


def composite_d2ux(c: CompositeWave, t: float, x):
    """Second derivative; off the contact support only the rarefaction part
    contributes.  At the support edge see :func:`contact_d2ux` conventions."""
    x = np.asarray(x, dtype=float)
    d = _contact_d2ux_onesided(c.contact, t, _parts(c, t, x)) + np.asarray(
        smooth_rarefaction_d2ux(c.rarefaction, t, x)
    )
    if c.left_rarefaction is not None:
        d = d + np.asarray(smooth_rarefaction_d2ux(c.left_rarefaction, t, x))
    return _out(d)


def u_multi(c: CompositeWave, t: float, x):
    """Unshifted asymptotic state: contact at time ``t`` plus the exact fans."""
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    contact = c.contact.shifted(0.0)
    u = np.asarray(contact_u(contact, t, _parts(c, t, x)))
    r = c.rarefaction
    if not r.trivial:
        u = u + np.asarray(rarefaction_exact(r.flux, r.u_minus, r.u_plus, t, x)) - r.u_minus
    lr = c.left_rarefaction
    if lr is not None and not lr.trivial:
        u = u + np.asarray(rarefaction_exact(lr.flux, lr.u_minus, lr.u_plus, t, x)) - lr.u_plus
    return _out(u)


def _require_reduced(c: CompositeWave):
    if c.left_rarefaction is not None or c.contact_speed != 0.0:
        raise ValueError("the remainder is implemented for the reduced contact + rarefaction case")


def remainder_Fp_tilde(c: CompositeWave, t: float, x, flux: FluxSpec | None = None):
    """Interaction part ``-(f'(U+U^r) - f'(U^r)) U^r_x - f'(U+U^r) U_x``."""
    _require_reduced(c)
    flux = flux if flux is not None else c.flux
    x = np.asarray(x, dtype=float)
    U = np.asarray(contact_u(c.contact, t, x))
    dU = np.asarray(contact_dux(c.contact, t, x))
    Ur = np.asarray(smooth_rarefaction_eval(c.rarefaction, t, x))
    dUr = np.asarray(smooth_rarefaction_dux(c.rarefaction, t, x))
    lam_sum = np.asarray(flux.df(U + Ur), dtype=float)
    lam_r = np.asarray(flux.df(Ur), dtype=float)
    return _out(-(lam_sum - lam_r) * dUr - lam_sum * dU)


def remainder_Fp(c: CompositeWave, t: float, x, flux: FluxSpec | None = None):
    """Full residual ``F_p`` of the composite:
    ``U~_t + f(U~)_x - mu (|U~_x|^(p-1) U~_x)_x = -F_p``.

    The viscous cross term is differentiated analytically.  Raises
    :class:`SupportEdgeError` exactly at a contact support edge when p > 2.
    """
    _require_reduced(c)
    x = np.asarray(x, dtype=float)
    w = c.contact
    p, mu = w.p, w.mu
    dU = np.asarray(contact_dux(w, t, x))
    dUr = np.asarray(smooth_rarefaction_dux(c.rarefaction, t, x))
    d2U = _contact_d2ux_onesided(w, t, x)
    d2Ur = np.asarray(smooth_rarefaction_d2ux(c.rarefaction, t, x))
    dS = dU + dUr
    # |U_x|^(p-1) U_xx stays bounded at the edges: -(2 p B xi/(p-1)) tau^-1 profile
    tau = w.tau(t)
    xi = _xi(w, t, x)
    contact_part = -(2.0 * B_or_zero(w) * xi / (p - 1.0)) / tau * _profile(w, xi)
    visc = mu * p * (np.abs(dS) ** (p - 1.0) * (d2U + d2Ur) - contact_part)
    return _out(np.asarray(remainder_Fp_tilde(c, t, x, flux)) + visc)


def B_or_zero(w: BarenblattWave) -> float:
    return w.B if w.A > 0 else 0.0
