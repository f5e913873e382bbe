"""Exact exit-time quantities of the transparent posterior diffusion.

The posterior dp = k p (1-p) dW leaving [lower, upper] admits a closed
Laplace transform (a ratio of hyperbolic sines in log-odds coordinates)
and a closed expected exit time.  The expected embedding time of any
finitely supported terminal law also has a potential-integral form, which
doubles as an independent quadrature oracle for the closed formulas.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .model import InvalidModelError, ModelParams, TerminalLaw


def gamma_of_s(s: float, params: ModelParams) -> float:
    """Exponent discriminant sqrt(1 + 8 s sigma^2 / (mu_h - mu_l)^2).

    Equals 1 at s = 0 and grows like sqrt(s).
    """
    if s < 0:
        raise InvalidModelError(f"transform parameter s must be >= 0 (got {s})")
    return math.sqrt(1.0 + 8.0 * s / params.k**2)


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def _logsinh(y: float) -> float:
    """log(sinh(y)) for y >= 0 without overflow; -inf at y = 0."""
    if y == 0.0:
        return -math.inf
    return y + math.log(-math.expm1(-2.0 * y)) - math.log(2.0)


def _check_boundaries(lower: float, upper: float) -> None:
    if lower <= 0.0 or upper >= 1.0:
        raise InvalidModelError(
            f"boundaries at the absorbing endpoints have divergent log-odds; "
            f"got [{lower}, {upper}]"
        )
    if not lower < upper:
        raise InvalidModelError(f"need lower < upper, got [{lower}, {upper}]")


def laplace_exit_transform(s: float, p: float, lower: float, upper: float,
                           params: ModelParams) -> float:
    """E_p[exp(-s tau)] for the exit time tau from [lower, upper].

    Evaluated in log space (exponentials of differences of log-sinh
    values), so large s or extreme log-odds ratios cannot overflow.
    Equals 1 at s = 0 and on either boundary.
    """
    if s < 0:
        raise InvalidModelError(f"transform parameter s must be >= 0 (got {s})")
    _check_boundaries(lower, upper)
    if not lower <= p <= upper:
        raise InvalidModelError(f"start {p} outside [{lower}, {upper}]")
    if s == 0.0 or p == lower or p == upper:
        return 1.0

    half = 0.5 * gamma_of_s(s, params)
    z_span = _logit(upper) - _logit(lower)
    z_up = _logit(upper) - _logit(p)
    z_dn = _logit(p) - _logit(lower)
    log_denom = _logsinh(half * z_span)
    term_lo = math.exp(_logsinh(half * z_up) - log_denom) / math.sqrt(lower * (1.0 - lower))
    term_hi = math.exp(_logsinh(half * z_dn) - log_denom) / math.sqrt(upper * (1.0 - upper))
    return math.sqrt(p * (1.0 - p)) * (term_lo + term_hi)


def _phi_entropy(p):
    """(2p - 1) log(p / (1-p)); the generator potential of the exit time."""
    p = np.asarray(p, dtype=float)
    out = (2.0 * p - 1.0) * np.log(p / (1.0 - p))
    return out if out.ndim else float(out)


def expected_exit_time(p0, lower, upper, params: ModelParams):
    """Expected exit time of the transparent posterior from [lower, upper].

    (2 sigma^2 / (mu_h - mu_l)^2) [q F(upper) + (1-q) F(lower) - F(p0)]
    with F(p) = (2p - 1) log(p/(1-p)) and q the upper-hit probability from
    the optional-stopping identity.  Vectorized over ``lower``.
    """
    _check_boundaries(np.min(lower), np.max(upper))
    lo = np.asarray(lower, dtype=float)
    up = np.asarray(upper, dtype=float)
    if np.any(lo > p0) or np.any(up < p0):
        raise InvalidModelError(f"p0={p0} must lie within [{lower}, {upper}]")
    width = up - lo
    q = np.where(width > 0, (p0 - lo) / np.where(width > 0, width, 1.0), 0.0)
    value = (2.0 / params.k**2) * (
        q * _phi_entropy(up) + (1.0 - q) * _phi_entropy(lo) - _phi_entropy(p0)
    )
    value = np.maximum(value, 0.0)  # clamp -1e-17-scale round-off at the boundary
    return value if value.ndim else float(value)


def expected_exit_time_via_slope(p0: float, lower: float, upper: float,
                                 params: ModelParams) -> float:
    """Quadrature cross-check of :func:`expected_exit_time`.

    Integrates the generator-equation slope psi(r) = int_{p0}^{r}
    2 / (k^2 t^2 (1-t)^2) dt numerically and assembles the two-boundary
    expectation from it; shares no code with the closed form.
    """
    _check_boundaries(lower, upper)
    k2 = params.k**2

    def psi_prime(t: float) -> float:
        return 2.0 / (k2 * t * t * (1.0 - t) ** 2)

    def psi(r: float) -> float:
        val, _ = integrate.quad(psi_prime, p0, r, epsabs=1e-12, epsrel=1e-12)
        return val

    q = (p0 - lower) / (upper - lower)
    up_leg, _ = integrate.quad(psi, p0, upper, epsabs=1e-11, limit=100)
    dn_leg, _ = integrate.quad(psi, p0, lower, epsabs=1e-11, limit=100)
    return q * up_leg + (1.0 - q) * dn_leg


def potential(law: TerminalLaw, y):
    """Potential of the terminal law: U(y) = sum_i mass_i |belief_i - y|.

    Convex and piecewise linear in y; kinks exactly at the atoms.
    """
    y_arr = np.asarray(y, dtype=float)
    beliefs = law.beliefs
    masses = law.masses
    out = np.abs(beliefs[None, ...] - np.atleast_1d(y_arr)[..., None]) @ masses
    return out.reshape(y_arr.shape) if y_arr.ndim else float(out[0])


def embedding_time_via_potential(law: TerminalLaw, params: ModelParams) -> float:
    """Expected embedding time of ``law`` by the transparent posterior.

    Integrates (U(y) - |p0 - y|) / sigma0(y)^2 over the support hull by
    adaptive quadrature, splitting at the integrand kinks (every atom and
    the prior).  For a two-atom law this must agree with
    :func:`expected_exit_time`; for spread-out laws it exceeds it.
    """
    beliefs = law.beliefs
    if beliefs[0] <= 0.0 or beliefs[-1] >= 1.0:
        raise InvalidModelError(
            "law supported at an absorbing endpoint has divergent embedding time"
        )
    if law.is_point_mass:
        return 0.0
    p0 = params.p0
    k2 = params.k**2
    masses = law.masses

    def integrand(y: float) -> float:
        u_val = float(np.dot(masses, np.abs(beliefs - y)))
        num = u_val - abs(p0 - y)
        if num <= 0.0:
            return 0.0
        return num / (k2 * (y * (1.0 - y)) ** 2)

    lo, hi = float(beliefs[0]), float(beliefs[-1])
    kinks = sorted({float(b) for b in beliefs} | {p0})
    interior = [x for x in kinks if lo < x < hi]
    value, _ = integrate.quad(
        integrand, lo, hi, points=interior or None, epsabs=1e-9, epsrel=1e-10, limit=200
    )
    return value
