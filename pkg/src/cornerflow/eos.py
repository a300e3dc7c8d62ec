"""Gamma-law equation of state, Bernoulli density inversion and derived scalars.

Coordinates: ``t`` is the scaled squared speed |grad u|^2/x1^2 and ``s`` is
the rescaled height (distance below the stagnation level).  In this frame
the inverted density H(t; s) decreases in t and increases in s; the
physical-frame derivative of the density with respect to height is
``-dH/ds`` and is negative on the subsonic branch.
"""

from dataclasses import dataclass, field

import numpy as np

from ._dispatch import kernels
from .errors import DomainError, NumericalError, StateError, SubsonicityError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


@dataclass(frozen=True)
class EosModel:
    """Gamma-law gas p = A*rho^gamma with gravity g and surface density rho_bar0."""

    gamma: float
    A: float = 1.0
    rho_bar0: float = 1.0
    g: float = 1.0
    eps0: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise DomainError("gamma must exceed 1")
        if self.A <= 0 or self.rho_bar0 <= 0 or self.g <= 0:
            raise DomainError("A, rho_bar0 and g must be positive")
        if self.eps0 is None:
            object.__setattr__(self, "eps0", 1e-3 * self.rho_bar0)
        if self.eps0 <= 0:
            raise DomainError("eps0 must be positive")

    @property
    def x2_st(self) -> float:
        """Stagnation height p'(rho_bar0)/(2g)."""
        return self.A * self.gamma * self.rho_bar0 ** (self.gamma - 1.0) / (2.0 * self.g)

    def to_text(self) -> str:
        keys = ["gamma", "A", "rho_bar0", "g", "eps0"]
        return "\n".join(f"{k} = {format(getattr(self, k), '.17g')}" for k in keys) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "EosModel":
        vals = {}
        for ln, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"line {ln}: expected key = value, got {raw!r}")
            k, v = (p.strip() for p in line.split("=", 1))
            vals[k] = float(v)
        return cls(**vals)


def pressure(model: EosModel, rho):
    """p(rho) = A*rho^gamma; see pressure_derivative for p'."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density must be nonnegative")
    return model.A * rho ** model.gamma


def pressure_derivative(model: EosModel, rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density must be nonnegative")
    return model.A * model.gamma * rho ** (model.gamma - 1.0)


def enthalpy(model: EosModel, rho):
    """h(rho) = integral of p'(w)/w from rho_bar0 to rho; h(rho_bar0) = 0."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("density must be positive")
    gm1 = model.gamma - 1.0
    return model.A * model.gamma / gm1 * (rho ** gm1 - model.rho_bar0 ** gm1)


def sound_speed_sq(model: EosModel, rho):
    return pressure_derivative(model, rho)


def critical_density(model: EosModel, x2: float) -> float:
    """Local critical density at physical height x2 in [0, x2_st].

    Solves p'(rho)/2 + h(rho) + g*x2 = p'(rho_bar0)/2 by safeguarded
    Newton; strictly decreasing in x2 with value rho_bar0 at x2 = 0.
    """
    if not 0.0 <= x2 <= model.x2_st * (1.0 + 1e-12):
        raise DomainError(f"height {x2} outside [0, {model.x2_st}]")
    return _critical_density_unchecked(model, x2)


def _critical_density_unchecked(model: EosModel, x2: float) -> float:
    if x2 == 0.0:
        return model.rho_bar0
    target = 0.5 * model.A * model.gamma * model.rho_bar0 ** (model.gamma - 1.0) - model.g * x2

    def f(r):
        return 0.5 * float(pressure_derivative(model, r)) + float(enthalpy(model, r)) - target

    def fp(r):
        # (p'/2 + h)' = p''/2 + p'/r
        gm1 = model.gamma - 1.0
        return 0.5 * model.A * model.gamma * gm1 * r ** (model.gamma - 2.0) + model.A * model.gamma * r ** (model.gamma - 2.0)

    lo, hi = 1e-300, model.rho_bar0
    if f(hi) < 0:
        raise DomainError("critical density undefined: height beyond vacuum limit")
    # the residual floor scales with the pressure derivative, not the target
    scale = max(1.0, abs(target), 0.5 * float(pressure_derivative(model, model.rho_bar0)))
    x = model.rho_bar0 * 0.9
    for _ in range(200):
        r = f(x)
        if abs(r) <= 1e-13 * scale:
            return x
        if r > 0:
            hi = x
        else:
            lo = x
        step = r / fp(x)
        xn = x - step
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-16 * x:
            x = xn
            break
        x = xn
    res = f(x)
    if abs(res) > 1e-10 * scale:
        raise NumericalError("critical-density iteration stalled", residual=res)
    return x


@dataclass(frozen=True)
class BernoulliState:
    """Inverted density at a rescaled state (t, s) with both H-derivatives.

    d1H = dH/dt and d2H = dH/ds in the rescaled frame; d1H < 0 and
    d2H > 0 on the subsonic branch.  ``d_rho_d_height`` is the
    physical-frame density derivative -d2H (negative while subsonic).
    """

    t: float
    s: float
    rho: float
    d1H: float
    d2H: float

    @property
    def d_rho_d_height(self) -> float:
        return -self.d2H


def invert_many(model: EosModel, t, s, tol=1e-13):
    """Vectorized subsonic inversion; returns (rho, d1H, d2H, flag)."""
    return kernels.invert_bernoulli(
        t, s, model.gamma, model.A, model.rho_bar0, model.g, tol=tol
    )


def invert_density(model: EosModel, t: float, s: float) -> BernoulliState:
    """Invert the Bernoulli law at one admissible state.

    Raises StateError when no subsonic root exists and SubsonicityError
    when the root sits within eps0 of the local critical density.
    """
    if t < 0 or s < 0:
        raise DomainError("t and s must be nonnegative")
    rho, d1, d2, flag = invert_many(model, t, s)
    if int(flag) != 0:
        raise StateError(f"no subsonic root at (t={t}, s={s})")
    rho = float(rho)
    x2_phys = model.x2_st - s
    if 0.0 <= x2_phys:
        try:
            rcr = _critical_density_unchecked(model, x2_phys)
        except DomainError:
            rcr = None
        if rcr is not None and rho - rcr < model.eps0:
            raise SubsonicityError(
                f"margin violated at (t={t}, s={s}): rho={rho:.12g}, rho_cr={rcr:.12g}"
            )
    return BernoulliState(t=t, s=s, rho=rho, d1H=float(d1), d2H=float(d2))


def _gl_panel(f, a, b):
    x = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
    return 0.5 * (b - a) * (f(x) @ _GL_WEIGHTS)


def adaptive_gauss_legendre(f, a, b, tol=1e-11, max_depth=30):
    """Recursive-bisection 15-point Gauss-Legendre quadrature."""

    def rec(a, b, whole, depth):
        m = 0.5 * (a + b)
        left = _gl_panel(f, a, m)
        right = _gl_panel(f, m, b)
        if abs(left + right - whole) <= tol or depth >= max_depth:
            return left + right
        return rec(a, m, left, depth + 1) + rec(m, b, right, depth + 1)

    if a == b:
        return 0.0
    return rec(a, b, _gl_panel(f, a, b), 0)


def F_of(model: EosModel, t: float, s: float, tol=1e-11):
    """F(t;s) = integral of 1/H over speeds, with both partial derivatives.

    Returns (F, dF1, dF2) where dF1 = 1/H(t;s) and dF2 is the integral
    of the s-derivative of 1/H.  Inversion failures at quadrature nodes
    propagate as StateError.
    """
    if t < 0 or s < 0:
        raise DomainError("t and s must be nonnegative")
    if t == 0.0:
        st = invert_density(model, 0.0, s)
        return 0.0, 1.0 / st.rho, 0.0

    def inv_h(tau):
        rho, _, _, flag = invert_many(model, tau, s)
        if np.any(flag):
            raise StateError(f"inversion failed inside F quadrature at s={s}")
        return 1.0 / rho

    def dinv_h(tau):
        rho, _, d2, flag = invert_many(model, tau, s)
        if np.any(flag):
            raise StateError(f"inversion failed inside F quadrature at s={s}")
        return -d2 / (rho * rho)

    F = adaptive_gauss_legendre(inv_h, 0.0, t, tol=tol)
    dF2 = adaptive_gauss_legendre(dinv_h, 0.0, t, tol=tol)
    st = invert_density(model, t, s)
    return F, 1.0 / st.rho, dF2


def _F_many(model: EosModel, t, s, npanel=1):
    """Fixed-panel vectorized F and dF2 on arrays of states."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    F = np.zeros_like(t)
    dF2 = np.zeros_like(t)
    for k in range(npanel):
        a = t * (k / npanel)
        b = t * ((k + 1) / npanel)
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        for xi, wi in zip(_GL_NODES, _GL_WEIGHTS):
            tau = half * xi + mid
            rho, _, d2, flag = invert_many(model, tau, s)
            if np.any(flag):
                bad = np.nonzero(flag.ravel())[0][0]
                raise StateError(
                    f"inversion failed in F_many at node t={tau.ravel()[bad]!r}, "
                    f"s={np.broadcast_arrays(tau, s)[1].ravel()[bad]!r}"
                )
            F += wi * half / rho
            dF2 += wi * half * (-d2 / (rho * rho))
    return F, dF2


def F_many(model: EosModel, t, s, tol=1e-11):
    """Vectorized F(t;s), dF2(t;s).

    One 15-point panel is exact to machine precision for the smooth
    subsonic integrand; a spot-check against the two-panel rule on a
    subsample guards the tolerance and triggers a full refinement pass
    when it ever trips.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    F1, d1 = _F_many(model, t, s, npanel=1)
    n = t.size
    if n:
        idx = np.arange(0, n, max(1, n // 64))
        F2s, _ = _F_many(model, t.ravel()[idx], np.broadcast_to(s, t.shape).ravel()[idx], npanel=2)
        if np.max(np.abs(F2s - F1.ravel()[idx])) > tol:
            F2, d2 = _F_many(model, t, s, npanel=4)
            return F2, d2
    return F1, d1


def lambda_of(model: EosModel, x2: float) -> float:
    """Free-boundary weight lambda(x2) = 2*x2/rho_bar0 - F(x2; x2)."""
    if x2 < 0:
        raise DomainError("x2 must be nonnegative")
    F, _, _ = F_of(model, x2, x2)
    return 2.0 * x2 / model.rho_bar0 - F


def lambda_prime(model: EosModel, x2: float) -> float:
    """lambda'(x2) = 1/rho_bar0 - dF2(x2; x2)."""
    if x2 < 0:
        raise DomainError("x2 must be nonnegative")
    _, _, dF2 = F_of(model, x2, x2)
    return 1.0 / model.rho_bar0 - dF2


def lambda_alt(model: EosModel, x2: float, tol=1e-11) -> float:
    """Alternate expression x2/rho0 + int_0^{x2} d/dtau(1/H) * tau dtau."""

    def f(tau):
        rho, d1, _, flag = invert_many(model, tau, x2)
        if np.any(flag):
            raise StateError("inversion failed in lambda_alt")
        return (-d1 / (rho * rho)) * tau

    return x2 / model.rho_bar0 + adaptive_gauss_legendre(f, 0.0, x2, tol=tol)


class GammaLawMedium:
    """Vectorized EOS evaluations used by the discrete functionals."""

    def __init__(self, model: EosModel):
        self.model = model
        self.rho0 = model.rho_bar0

    compressible = True

    def H_d1_d2(self, t, s):
        rho, d1, d2, flag = invert_many(self.model, t, s)
        if np.any(flag):
            i = np.nonzero(np.ravel(flag))[0][0]
            raise StateError(
                f"subsonic inversion failed at node index {i} "
                f"(t={np.ravel(t)[i]!r}, s={np.ravel(np.broadcast_to(s, np.shape(t)))[i]!r})"
            )
        return rho, d1, d2

    def F_dF2(self, t, s):
        return F_many(self.model, t, s)

    def _lam_pair_unique(self, s):
        # heights repeat across lattice rows: evaluate on unique values
        s = np.asarray(s, dtype=float)
        su, inv = np.unique(s.ravel(), return_inverse=True)
        F, dF2 = F_many(self.model, su, su)
        lam = 2.0 * su / self.rho0 - F
        lamp = 1.0 / self.rho0 - dF2
        return lam[inv].reshape(s.shape), lamp[inv].reshape(s.shape)

    def lam_pair(self, s):
        return self._lam_pair_unique(s)

    def lam(self, s):
        return self._lam_pair_unique(s)[0]

    def lam_prime(self, s):
        return self._lam_pair_unique(s)[1]


class IncompressibleMedium:
    """Exact incompressible limit: H == rho_bar0, F = t/rho0, lambda = s/rho0."""

    compressible = False

    def __init__(self, rho_bar0: float = 1.0):
        if rho_bar0 <= 0:
            raise DomainError("rho_bar0 must be positive")
        self.rho0 = rho_bar0

    def H_d1_d2(self, t, s):
        t = np.asarray(t, dtype=float)
        H = np.full_like(t, self.rho0)
        z = np.zeros_like(t)
        return H, z, z

    def F_dF2(self, t, s):
        t = np.asarray(t, dtype=float)
        return t / self.rho0, np.zeros_like(t)

    def lam(self, s):
        return np.asarray(s, dtype=float) / self.rho0

    def lam_prime(self, s):
        s = np.asarray(s, dtype=float)
        return np.full_like(s, 1.0 / self.rho0)

    def lam_pair(self, s):
        return self.lam(s), self.lam_prime(s)
