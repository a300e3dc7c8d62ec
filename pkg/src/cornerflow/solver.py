"""Energy descent for approximate variational solutions, and the
domain-variation (first variation) validator.

The minimizer runs projected gradient descent on the energy with the
positivity indicator smoothed over a width eps_chi (sub-grid by
default, so invisible at the quadrature order used).  The gradient of
the compressible term needs no lagging: dF/dt = 1/H(t; x2) is available
in closed form at the current iterate.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GeometryError, StateError
from .eos import IncompressibleMedium, invert_many
from .fields import GridField

ARMIJO_C = 1e-4


@dataclass
class MinimizeConfig:
    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float
    h: float
    boundary: callable  # (x1, x2) -> Dirichlet data, also the initial guess
    medium: object = field(default_factory=IncompressibleMedium)
    eps_chi: float = None  # default 2h
    step0: float = 1.0
    armijo: float = ARMIJO_C
    max_iter: int = 50_000
    tol: float = 1e-10
    tol_window: int = 10
    # post-descent projected Gauss-Seidel sweeps: the energy-based stopping
    # rule certifies the energy, not the iterate; the polish drives cellwise
    # stationarity of the same discrete functional when sweeps > 0
    pgs_sweeps: int = 0

    def __post_init__(self):
        if self.eps_chi is None:
            self.eps_chi = 2.0 * self.h
        if self.eps_chi <= 0 or self.tol <= 0:
            raise DomainError("eps_chi and tol must be positive")


@dataclass
class ConvergenceLog:
    iterations: list = field(default_factory=list)  # (it, energy, step, gmax)
    converged: bool = False
    stagnated: bool = False
    message: str = ""


def _smoothed_chi(v, eps):
    return np.clip(v / eps, 0.0, 1.0)


class _Discretization:
    """Forward-difference energy on the (n1-1) x (n2-1) sub-lattice."""

    def __init__(self, cfg: MinimizeConfig):
        self.cfg = cfg
        n1 = int(round((cfg.x1_max - cfg.x1_min) / cfg.h))
        n2 = int(round((cfg.x2_max - cfg.x2_min) / cfg.h))
        self.n1, self.n2 = n1, n2
        self.x1 = cfg.x1_min + (np.arange(n1) + 0.5) * cfg.h
        self.x2 = cfg.x2_min + (np.arange(n2) + 0.5) * cfg.h
        self.X1, self.X2 = np.meshgrid(self.x1, self.x2, indexing="ij")
        med = cfg.medium
        self.lam = np.maximum(med.lam(np.maximum(self.X2, 0.0)), 0.0)
        self.on_axis = abs(cfg.x1_min) < 1e-12

    def speed_sq(self, v):
        h = self.cfg.h
        d1 = (v[1:, :-1] - v[:-1, :-1]) / h
        d2 = (v[:-1, 1:] - v[:-1, :-1]) / h
        X1 = self.X1[:-1, :-1]
        return (d1 * d1 + d2 * d2) / (X1 * X1), d1, d2

    def energy(self, v):
        cfg = self.cfg
        t, _, _ = self.speed_sq(v)
        med = cfg.medium
        F, _ = med.F_dF2(t, self.X2[:-1, :-1])
        s = _smoothed_chi(v[:-1, :-1], cfg.eps_chi)
        dens = self.X1[:-1, :-1] * (F + self.lam[:-1, :-1] * s)
        return float(np.sum(dens) * cfg.h * cfg.h)

    def gradient(self, v):
        """Exact gradient of the smoothed discrete energy."""
        cfg = self.cfg
        h = cfg.h
        t, d1, d2 = self.speed_sq(v)
        med = cfg.medium
        H, _, _ = med.H_d1_d2(t, self.X2[:-1, :-1])
        a = 1.0 / (self.X1[:-1, :-1] * H)  # x1 * dF/dt / x1^2
        g = np.zeros_like(v)
        # d/dv of sum a*((vE - v)^2 + (vN - v)^2)
        f1 = 2.0 * a * d1 / h
        f2 = 2.0 * a * d2 / h
        g[:-1, :-1] -= f1 + f2
        g[1:, :-1] += f1
        g[:-1, 1:] += f2
        g *= h * h
        s_in = (v[:-1, :-1] > 0.0) & (v[:-1, :-1] < cfg.eps_chi)
        g[:-1, :-1] += np.where(
            s_in, self.X1[:-1, :-1] * self.lam[:-1, :-1] / cfg.eps_chi, 0.0
        ) * (h * h)
        return g


def minimize_EF(cfg: MinimizeConfig):
    """Projected gradient descent on the smoothed energy.

    Returns (GridField, ConvergenceLog).  Dirichlet data is pinned on
    the outermost cell ring; iterates are projected onto v >= 0.
    Raises StateError if the subsonic inversion fails at any cell.
    """
    disc = _Discretization(cfg)
    v = np.asarray(cfg.boundary(disc.X1, disc.X2), dtype=float).copy()
    if np.any(v[0, :] < 0) or np.any(v[-1, :] < 0) or np.any(v[:, 0] < 0) or np.any(v[:, -1] < 0):
        raise DomainError("boundary data must be nonnegative")
    v = np.maximum(v, 0.0)
    interior = np.zeros_like(v, dtype=bool)
    interior[1:-1, 1:-1] = True

    med = cfg.medium
    if getattr(med, "compressible", False):
        t, _, _ = disc.speed_sq(v)
        _, _, _, flags = invert_many(med.model, t, disc.X2[:-1, :-1])
        if np.any(flags):
            i, j = np.unravel_index(np.argmax(flags != 0), flags.shape)
            raise StateError(
                f"subsonicity violated at cell ({i}, {j}), "
                f"x = ({disc.x1[i]:.6g}, {disc.x2[j]:.6g})"
            )

    log = ConvergenceLog()
    E = disc.energy(v)
    step = cfg.step0
    recent = []
    for it in range(cfg.max_iter):
        g = disc.gradient(v)
        g_eff = np.where(interior & ((v > 0) | (g < 0)), g, 0.0)
        gmax = float(np.max(np.abs(g_eff))) if g_eff.size else 0.0
        accepted = False
        while step >= 1e-14:
            trial = v - step * g
            trial = np.where(interior, np.maximum(trial, 0.0), v)
            decrease = float(np.sum(g_eff * (v - trial)))
            try:
                E_trial = disc.energy(trial)
            except StateError:
                # the trial overshot into supersonic states: reject it
                step *= 0.5
                continue
            if E_trial <= E - cfg.armijo * decrease:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            log.stagnated = True
            log.message = f"backtracking exhausted at iteration {it}"
            break
        rel_drop = (E - E_trial) / max(abs(E), 1e-300)
        v, E = trial, E_trial
        log.iterations.append((it, E, step, gmax))
        step = min(step * 2.0, 1e3)
        recent.append(rel_drop)
        if len(recent) > cfg.tol_window:
            recent.pop(0)
            if sum(recent) < cfg.tol:
                log.converged = True
                log.message = f"energy stationary after {it + 1} iterations"
                break
    else:
        log.message = "max iterations reached"

    for _ in range(cfg.pgs_sweeps):
        v = _pgs_sweep(disc, v)
    if cfg.pgs_sweeps:
        log.iterations.append((cfg.max_iter, disc.energy(v), 0.0, 0.0))

    out = GridField(cfg.x1_min, cfg.x1_max, cfg.x2_min, cfg.x2_max, cfg.h, v)
    return out, log


def _pgs_sweep(disc: _Discretization, v):
    """One red-black projected Gauss-Seidel sweep of the smoothed energy.

    Exact per-cell minimization of the frozen-coefficient quadratic plus
    the piecewise-linear indicator term, projected onto v >= 0.
    """
    cfg = disc.cfg
    eps = cfg.eps_chi
    v = v.copy()
    t, _, _ = disc.speed_sq(v)
    med = cfg.medium
    H, _, _ = med.H_d1_d2(t, disc.X2[:-1, :-1])
    a_full = np.zeros_like(v)
    a_full[:-1, :-1] = 1.0 / (disc.X1[:-1, :-1] * H)
    # indicator term x1*lam*s(v)*h^2 (the edge terms' h^2 cancels, this does not)
    slope = disc.X1 * disc.lam * cfg.h * cfg.h
    n1, n2 = v.shape
    I, J = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    interior = (I > 0) & (I < n1 - 1) & (J > 0) & (J < n2 - 1)
    for color in (0, 1):
        mask = interior & (((I + J) % 2) == color)
        a_c = a_full
        a_w = np.roll(a_full, 1, axis=0)
        a_s = np.roll(a_full, 1, axis=1)
        vE = np.roll(v, -1, axis=0)
        vN = np.roll(v, -1, axis=1)
        vW = np.roll(v, 1, axis=0)
        vS = np.roll(v, 1, axis=1)
        A = 2.0 * a_c + a_w + a_s
        B = a_c * (vE + vN) + a_w * vW + a_s * vS
        m = slope / eps  # h^2 cancels against the edge terms' 1/h^2... both carry h^2
        # candidates: within the smoothing band, above it, and at zero
        with np.errstate(divide="ignore", invalid="ignore"):
            v_band = np.clip((B - 0.5 * m) / A, 0.0, eps)
            v_up = np.maximum(B / A, eps)
        cand = np.stack([np.zeros_like(v), v_band, v_up])

        def local_energy(w):
            return (
                a_c * ((vE - w) ** 2 + (vN - w) ** 2)
                + a_w * (w - vW) ** 2
                + a_s * (w - vS) ** 2
                + slope * np.clip(w / eps, 0.0, 1.0)
            )

        vals = np.stack([local_energy(c) for c in cand])
        best = cand[np.argmin(vals, axis=0), I, J]
        v = np.where(mask, best, v)
    return v


def axis_compatibility_residual(field_: GridField):
    """Max |(1/x1) d2 u| along the axis-adjacent cell column.

    The descent does not enforce the axis compatibility condition (the
    vertical velocity component must vanish on the axis); this residual
    is reported so runs can judge it.
    """
    if not getattr(field_, "on_axis", False):
        raise DomainError("field does not touch the symmetry axis")
    x1 = field_.cell_x1[0]
    x2 = field_.cell_x2[1:-1]
    _, g2 = field_.gradient(np.full_like(x2, x1), x2)
    return float(np.max(np.abs(g2 / x1))) if x2.size else 0.0


# ---------------------------------------------------------------------------
# first-variation validator
# ---------------------------------------------------------------------------

def _lattice(field_, h):
    x1 = np.arange(field_.x1_min + 0.5 * h, field_.x1_max, h)
    x2 = np.arange(field_.x2_min + 0.5 * h, field_.x2_max, h)
    return np.meshgrid(x1, x2, indexing="ij")


def first_variation_terms(field_, medium, phi, dphi, h=None):
    """The four domain-variation integrals, evaluated on a lattice.

    ``phi(x1, x2) -> (phi1, phi2)`` must vanish near the lattice hull and
    on the axis; ``dphi`` returns the Jacobian entries (d1p1, d2p1,
    d1p2, d2p2).  Returns the total (zero at exact solutions).
    """
    if h is None:
        h = getattr(field_, "h", 1.0 / 256.0)
    X1, X2 = _lattice(field_, h)
    x1 = X1.ravel()
    x2 = X2.ravel()
    u = field_.value(x1, x2)
    g1, g2 = field_.gradient(x1, x2)
    p1, p2 = phi(x1, x2)
    d1p1, d2p1, d1p2, d2p2 = dphi(x1, x2)
    divp = d1p1 + d2p2
    chi = field_.chi(u)
    safe = np.maximum(x1, 1e-300)
    t = (g1 * g1 + g2 * g2) / (safe * safe)
    H = np.full_like(t, medium.rho0)
    F = np.zeros_like(t)
    dF2 = np.zeros_like(t)
    lam = np.zeros_like(t)
    lam_p = np.zeros_like(t)
    act = (t > 0) | chi
    if np.any(act):
        H[act], _, _ = medium.H_d1_d2(t[act], x2[act])
        F[act], dF2[act] = medium.F_dF2(t[act], x2[act])
    if np.any(chi):
        lam[chi], lam_p[chi] = medium.lam_pair(x2[chi])

    w = h * h
    gDg = g1 * (d1p1 * g1 + d2p1 * g2) + g2 * (d1p2 * g1 + d2p2 * g2)
    T1 = np.sum(x1 * (F + lam * chi) * divp) * w
    T2 = -2.0 * np.sum(gDg / (safe * H)) * w
    T3 = np.sum((F - 2.0 * t / H + lam * chi) * p1) * w
    T4 = np.sum(x1 * (dF2 + lam_p * chi) * p2) * w
    return {"T1": float(T1), "T2": float(T2), "T3": float(T3), "T4": float(T4),
            "total": float(T1 + T2 + T3 + T4)}


def flow_energy(field_, medium, phi, eps, h=None, dphi=None):
    """E_F of the resampled field u(x + eps*phi(x)) on the lattice."""
    if h is None:
        h = getattr(field_, "h", 1.0 / 256.0)
    X1, X2 = _lattice(field_, h)
    x1 = X1.ravel()
    x2 = X2.ravel()
    p1, p2 = phi(x1, x2)
    y1 = x1 + eps * p1
    y2 = x2 + eps * p2
    try:
        u = field_.value(y1, y2)
        g1, g2 = field_.gradient(y1, y2)
    except GeometryError:
        raise GeometryError("phi transports lattice points outside the field")
    # gradient of x -> u(x + eps*phi): (I + eps*Dphi)^T grad u(y)
    if eps:
        d1p1, d2p1, d1p2, d2p2 = (
            dphi(x1, x2) if dphi is not None else _numeric_dphi(phi, x1, x2)
        )
        G1 = (1.0 + eps * d1p1) * g1 + eps * d1p2 * g2
        G2 = eps * d2p1 * g1 + (1.0 + eps * d2p2) * g2
    else:
        G1, G2 = g1, g2
    chi = u > 0 if not hasattr(field_, "umax") else field_.chi(u)
    safe = np.maximum(x1, 1e-300)
    t = (G1 * G1 + G2 * G2) / (safe * safe)
    F = np.zeros_like(t)
    lam = np.zeros_like(t)
    act = (t > 0) | chi
    if np.any(act):
        F[act], _ = medium.F_dF2(t[act], x2[act])
    if np.any(chi):
        lam[chi] = medium.lam(x2[chi])
    return float(np.sum(x1 * (F + lam * chi)) * h * h)


def _numeric_dphi(phi, x1, x2, d=1e-6):
    p1p, p2p = phi(x1 + d, x2)
    p1m, p2m = phi(x1 - d, x2)
    d1p1 = (p1p - p1m) / (2 * d)
    d1p2 = (p2p - p2m) / (2 * d)
    p1p, p2p = phi(x1, x2 + d)
    p1m, p2m = phi(x1, x2 - d)
    d2p1 = (p1p - p1m) / (2 * d)
    d2p2 = (p2p - p2m) / (2 * d)
    return d1p1, d2p1, d1p2, d2p2


def domain_variation_residual(field_, medium, phi, dphi, eps=1e-4, h=None):
    """Analytic first-variation total next to the flow finite difference.

    The two must satisfy ``analytic_total ~ -(E(eps) - E(-eps))/(2 eps)``
    up to O(eps^2) plus the discretization error of the shared lattice.
    """
    terms = first_variation_terms(field_, medium, phi, dphi, h=h)
    Ep = flow_energy(field_, medium, phi, +eps, h=h, dphi=dphi)
    Em = flow_energy(field_, medium, phi, -eps, h=h, dphi=dphi)
    flow_fd = (Ep - Em) / (2.0 * eps)
    return {
        "analytic_total": terms["total"],
        "flow_fd": flow_fd,
        "mismatch": terms["total"] + flow_fd,
        "terms": terms,
    }
