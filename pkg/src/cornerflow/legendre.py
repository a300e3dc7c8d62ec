"""Fractional-degree Legendre functions and the cone-angle constants.

P_nu is evaluated through the hypergeometric series
2F1(-nu, nu+1; 1; (1-s)/2); derivatives use the shifted-parameter
series, which stay regular at s = 1.  The series converges for
-1 < s <= 1 but slows near s = -1, where summation is capped and
checked (the root hunted below sits at s ~ -0.42, well inside).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InternalConsistencyError, NumericalError

_RTOL = 1e-16
_MAX_TERMS = 2000
_SLOW_CAP = 200  # near s = -1 (z -> 1) cap the summation and check convergence


def _hyp2f1(a, b, c, z):
    """Term-ratio summation of 2F1; z scalar or array in [0, 1)."""
    z = np.asarray(z, dtype=float)
    cap = _SLOW_CAP if np.any(z > 0.97) else _MAX_TERMS
    term = np.ones_like(z)
    total = np.ones_like(z)
    settled = np.zeros_like(z, dtype=int)
    for k in range(cap):
        term = term * ((a + k) * (b + k)) / ((c + k) * (k + 1.0)) * z
        total = total + term
        small = np.abs(term) <= _RTOL * np.abs(total)
        settled = np.where(small, settled + 1, 0)
        if np.all(settled >= 3):
            return total
    if not np.all(np.abs(term) <= 1e-12 * np.maximum(1.0, np.abs(total))):
        raise NumericalError(
            "hypergeometric series not converged (argument too close to -1)",
            residual=float(np.max(np.abs(term))),
        )
    return total


def _check_open_interval(s):
    s = np.asarray(s, dtype=float)
    if np.any(s <= -1.0) or np.any(s >= 1.0):
        raise DomainError("argument must lie in (-1, 1)")
    return s


def legendre_P(nu: float, s):
    """Legendre function of the first kind, degree nu, on (-1, 1]."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= -1.0) or np.any(s > 1.0):
        raise DomainError("argument must lie in (-1, 1]")
    return _hyp2f1(-nu, nu + 1.0, 1.0, 0.5 * (1.0 - s))


def legendre_P_prime(nu: float, s):
    """d/ds P_nu(s); regular at s = 1 with value nu(nu+1)/2."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= -1.0) or np.any(s > 1.0):
        raise DomainError("argument must lie in (-1, 1]")
    return 0.5 * nu * (nu + 1.0) * _hyp2f1(1.0 - nu, nu + 2.0, 2.0, 0.5 * (1.0 - s))


def legendre_P_second(nu: float, s):
    """d^2/ds^2 P_nu(s) through the twice-shifted series."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= -1.0) or np.any(s > 1.0):
        raise DomainError("argument must lie in (-1, 1]")
    coeff = -nu * (nu + 1.0) * (1.0 - nu) * (nu + 2.0) / 8.0
    return coeff * _hyp2f1(2.0 - nu, nu + 3.0, 3.0, 0.5 * (1.0 - s))


def legendre_ode_residual(nu: float, s):
    """(1-s^2) P'' - 2 s P' + nu(nu+1) P; zero for exact values."""
    s = _check_open_interval(s)
    P = legendre_P(nu, s)
    Pp = legendre_P_prime(nu, s)
    Ppp = legendre_P_second(nu, s)
    return (1.0 - s * s) * Ppp - 2.0 * s * Pp + nu * (nu + 1.0) * P


def legendre_Q1(s):
    """Second Legendre solution at degree 1: (s/2) log((1+s)/(1-s)) - 1."""
    s = _check_open_interval(s)
    return 0.5 * s * np.log((1.0 + s) / (1.0 - s)) - 1.0


def legendre_Q1_prime(s):
    s = _check_open_interval(s)
    return 0.5 * np.log((1.0 + s) / (1.0 - s)) + s / (1.0 - s * s)


def legendre_Q1_second(s):
    s = _check_open_interval(s)
    return 1.0 / (1.0 - s * s) + (1.0 + s * s) / (1.0 - s * s) ** 2


@dataclass(frozen=True)
class LegendreConstants:
    """Cone constants of the degree-3/2 Legendre derivative root."""

    s_star: float
    theta_star_rad: float
    theta_star_deg: float
    m0: float
    beta: float


def find_theta_star() -> LegendreConstants:
    """Locate the unique root of P'_{3/2} in (-1, 0) and derived constants.

    Bisection plus Newton polishing down to |P'| <= 1e-13.  The cone
    half-angle is arccos of the root; m0 = s*^2/8 is the weighted cone
    volume and beta = sqrt(15/2) normalizes the flat profile.
    """
    nu = 1.5
    # the root sits near -0.42; bracket well inside the series' fast zone
    lo, hi = -0.8, -0.05
    flo = float(legendre_P_prime(nu, lo))
    fhi = float(legendre_P_prime(nu, hi))
    if not flo * fhi < 0:
        raise InternalConsistencyError("P'_{3/2} root not bracketed in (-1, 0)")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = float(legendre_P_prime(nu, mid))
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-6:
            break
    x = 0.5 * (lo + hi)
    for _ in range(60):
        f = float(legendre_P_prime(nu, x))
        fp = float(legendre_P_second(nu, x))
        step = f / fp
        xn = x - step
        if not (lo <= xn <= hi):
            xn = 0.5 * (lo + hi)
        if float(legendre_P_prime(nu, xn)) == 0.0 or abs(xn - x) < 1e-16:
            x = xn
            break
        x = xn
    if abs(float(legendre_P_prime(nu, x))) > 1e-13:
        raise NumericalError(
            "theta* refinement stalled", residual=float(legendre_P_prime(nu, x))
        )
    theta = math.acos(x)
    return LegendreConstants(
        s_star=x,
        theta_star_rad=theta,
        theta_star_deg=math.degrees(theta),
        m0=x * x / 8.0,
        beta=math.sqrt(7.5),
    )
