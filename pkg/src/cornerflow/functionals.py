"""Discrete energies, monotonicity functionals and frequency quantities.

A "medium" (GammaLawMedium or IncompressibleMedium) supplies the
pointwise thermodynamics; fields supply u and grad u at quadrature
nodes.  The three point kinds are

* ``stagnation``: center (x1 > 0, 0), full balls, scaling power 3/2;
* ``axis``: center (0, x2 > 0), half balls, scaling power 2;
* ``origin``: center (0, 0), half balls, scaling power 5/2.

Per-radius records carry I, J, M, the kind's error terms K_i, the
boundary square term of the monotonicity derivative, and for the
origin kind the frequency quantities D, V, N with their cumulative
corrections.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FrequencyUndefinedError, GeometryError
from .quadrature import arc_nodes, ball_nodes

KINDS = ("stagnation", "axis", "origin")
SCALING_POWER = {"stagnation": 1.5, "axis": 2.0, "origin": 2.5}

_T_ACTIVE = 1e-300


def check_kind_center(kind, center):
    c1, c2 = center
    if kind == "stagnation" and not (c1 > 0 and c2 == 0):
        raise DomainError("stagnation centers have x1 > 0 and x2 = 0")
    if kind == "axis" and not (c1 == 0 and c2 > 0):
        raise DomainError("axis centers have x1 = 0 and x2 > 0")
    if kind == "origin" and not (c1 == 0 and c2 == 0):
        raise DomainError("the origin kind is centered at (0, 0)")


def delta_radius(field_, center, kind):
    """Largest admissible sweep radius: min(|x1|, dist)/2 off the axis, dist/2 on it."""
    d = field_.boundary_distance(center, half=kind in ("axis", "origin"))
    if kind == "stagnation":
        return 0.5 * min(center[0], d)
    return 0.5 * d


def default_radii(field_, center, kind, per_decade=24):
    """Log-spaced radii between 4h and 0.9*delta (grid fields)."""
    delta = delta_radius(field_, center, kind)
    r_min = 4.0 * getattr(field_, "h", delta / 256.0)
    r_max = 0.9 * delta
    if not r_max > r_min:
        raise GeometryError("no admissible radius window for this center")
    n = max(5, int(np.ceil(per_decade * np.log10(r_max / r_min))))
    return np.geomspace(r_min, r_max, n)


@dataclass
class _NodeEval:
    x1: np.ndarray
    x2: np.ndarray
    w: np.ndarray
    w_inv: np.ndarray
    u: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    t: np.ndarray
    chi: np.ndarray
    H: np.ndarray
    F: np.ndarray
    dF2: np.ndarray
    lam: np.ndarray
    lam_p: np.ndarray


def _evaluate(field_, medium, x1, x2, w, w_inv):
    u = field_.value(x1, x2)
    g1, g2 = field_.gradient(x1, x2)
    safe = np.maximum(x1, 1e-300)
    t = (g1 * g1 + g2 * g2) / (safe * safe)
    chi = field_.chi(u)
    H = np.full_like(t, medium.rho0)
    F = np.zeros_like(t)
    dF2 = np.zeros_like(t)
    lam = np.zeros_like(t)
    lam_p = np.zeros_like(t)
    # thermodynamics only where it matters: H and F on nodes with speed or
    # positivity, lambda only on the positivity set (lambda multiplies chi,
    # and is undefined below the free-surface height for compressible media)
    active = (t > _T_ACTIVE) | chi
    if np.any(active):
        ta = t[active]
        sa = x2[active]
        H[active], _, _ = medium.H_d1_d2(ta, sa)
        F[active], dF2[active] = medium.F_dF2(ta, sa)
    if np.any(chi):
        lam[chi], lam_p[chi] = medium.lam_pair(x2[chi])
    return _NodeEval(x1, x2, w, w_inv, u, g1, g2, t, chi, H, F, dF2, lam, lam_p)


def _ball_eval(field_, medium, center, r, half):
    n = ball_nodes(field_, center, r, half=half)
    return _evaluate(field_, medium, n.x1, n.x2, n.w, n.w_inv)


def _arc_eval(field_, medium, center, r, half, n_arc):
    n = arc_nodes(field_, center, r, half=half, n_arc=n_arc)
    ev = _evaluate(field_, medium, n.x1, n.x2, n.w, n.w / np.maximum(n.x1, 1e-300))
    return ev, n


def _mask_axis(arr, x1):
    """Zero the entries of axis-touching arc nodes (integrands vanish there)."""
    return np.where(x1 > 1e-12, arr, 0.0)


# ---------------------------------------------------------------------------
# energies
# ---------------------------------------------------------------------------

def energy_EF_ball(field_, medium, center, r, half=False):
    ev = _ball_eval(field_, medium, center, r, half)
    return float(np.sum(ev.w * ev.x1 * (ev.F + ev.lam * ev.chi)))


def energy_EH_ball(field_, medium, center, r, half=False):
    ev = _ball_eval(field_, medium, center, r, half)
    dirich = np.sum(ev.w_inv * (ev.g1**2 + ev.g2**2) / ev.H)
    return float(dirich + np.sum(ev.w * ev.x1 * (ev.x2 / medium.rho0) * ev.chi))


def energy_EF_arc(field_, medium, center, r, half=False, n_arc=4096):
    ev, _ = _arc_eval(field_, medium, center, r, half, n_arc)
    return float(np.sum(ev.w * ev.x1 * (ev.F + ev.lam * ev.chi)))


# ---------------------------------------------------------------------------
# per-radius record
# ---------------------------------------------------------------------------

def monotonicity_record(field_, medium, center, r, kind, n_arc=4096):
    """All monotonicity/frequency ingredients at one radius.

    Returns a dict; keys k1..k6 are the kind's error terms (unused ones
    are zero).  ``square`` is the boundary square term of the
    monotonicity-formula derivative at this radius.
    """
    check_kind_center(kind, center)
    half = kind in ("axis", "origin")
    delta = delta_radius(field_, center, kind)
    if np.isfinite(delta) and r >= delta * (1.0 + 1e-12):
        raise DomainError(f"radius {r} at or beyond the admissible delta {delta}")
    rho0 = medium.rho0
    bv = _ball_eval(field_, medium, center, r, half)
    av, an = _arc_eval(field_, medium, center, r, half, n_arc)

    E_F = float(np.sum(bv.w * bv.x1 * (bv.F + bv.lam * bv.chi)))
    x2p = np.maximum(bv.x2, 0.0)
    E_H = float(
        np.sum(bv.w_inv * (bv.g1**2 + bv.g2**2) / bv.H)
        + np.sum(bv.w * bv.x1 * (bv.x2 / rho0) * bv.chi)
    )
    dirichlet = float(np.sum(bv.w_inv * (bv.g1**2 + bv.g2**2) / bv.H))

    u_arc = _mask_axis(av.u, av.x1)
    un = av.g1 * an.n1 + av.g2 * an.n2
    j_int = _mask_axis(u_arc * u_arc / np.maximum(av.x1, 1e-300), av.x1)
    J = float(np.sum(av.w * j_int)) / rho0
    E_F_arc = float(np.sum(av.w * av.x1 * (av.F + av.lam * av.chi)))

    # boundary kernels
    inv_wH = _mask_axis(1.0 / (np.maximum(av.x1, 1e-300) * av.H), av.x1)
    dw = inv_wH - _mask_axis(1.0 / (np.maximum(av.x1, 1e-300) * rho0), av.x1)
    uun = u_arc * un
    u_sq = u_arc * u_arc
    arc_un_sq = float(np.sum(av.w * inv_wH * un * un))
    arc_uun = float(np.sum(av.w * inv_wH * uun))

    kappa = SCALING_POWER[kind]
    square_kernel = inv_wH * (un - kappa * u_arc / r) ** 2
    square_base = float(np.sum(av.w * square_kernel))

    # volume error terms shared by the kinds
    K1_x2 = E_H - E_F  # definition of the first error term
    vol_dF2 = bv.w * bv.x1 * bv.x2 * (bv.dF2 + (bv.lam_p - 1.0 / rho0) * bv.chi)
    K_x1x2 = float(np.sum(vol_dF2))

    rec = {
        "r": r,
        "E_F": E_F,
        "E_H": E_H,
        "E_F_arc": E_F_arc,
        "dirichlet": dirichlet,
        "J": J,
        "arc_un_sq": arc_un_sq,
        "arc_uun": arc_uun,
        "I": E_F,
        "k1": 0.0,
        "k2": 0.0,
        "k3": 0.0,
        "k4": 0.0,
        "k5": 0.0,
        "k6": 0.0,
    }

    if kind == "stagnation":
        rec["M"] = r**-3 * E_F - 1.5 * r**-4 * J
        rec["square"] = 2.0 * r**-3 * square_base
        rec["k1"] = K1_x2
        rec["k2"] = K_x1x2
        rec["k3"] = float(
            np.sum(
                bv.w
                * (bv.x1 - center[0])
                * (bv.F - 2.0 * bv.t / bv.H + bv.lam * bv.chi)
            )
        )
        rec["k4"] = 3.0 * float(np.sum(av.w * dw * uun))
        rec["k5"] = 4.5 / r * float(np.sum(av.w * (-dw) * u_sq))
        rec["k6"] = (
            1.5
            / r
            * float(
                np.sum(
                    av.w
                    * _mask_axis((av.x1 - center[0]) / np.maximum(av.x1, 1e-300) ** 2, av.x1)
                    * u_sq
                )
            )
            / rho0
        )
        rec["k_scale"] = r**-4
    elif kind == "axis":
        rec["M"] = r**-3 * E_F - 2.0 * r**-4 * J
        rec["square"] = 2.0 * r**-3 * square_base
        rec["k1"] = float(
            np.sum(bv.w * bv.x1 * (bv.x2 - center[1]) * (bv.dF2 + bv.lam_p * bv.chi))
        )
        rec["k2"] = 4.0 * float(np.sum(av.w * dw * uun))
        rec["k3"] = 8.0 / r * float(np.sum(av.w * (-dw) * u_sq))
        rec["k_scale"] = r**-4
    else:  # origin
        rec["M"] = r**-4 * E_F - 2.5 * r**-5 * J
        rec["square"] = 2.0 * r**-4 * square_base
        rec["k1"] = K1_x2
        rec["k2"] = K_x1x2
        rec["k3"] = 5.0 * float(np.sum(av.w * dw * uun))
        rec["k4"] = 12.5 / r * float(np.sum(av.w * (-dw) * u_sq))
        rec["k_scale"] = r**-5
        # frequency ingredients
        rec["S_void"] = float(np.sum(bv.w * bv.x1 * x2p * (1.0 - bv.chi)))
        rec["S_pos"] = float(np.sum(bv.w * bv.x1 * x2p * bv.chi))
        rec["script_J"] = float(np.sum(av.w * dw * u_sq))
        rec["grad_w_norm"] = float(
            np.sum(bv.w_inv * (bv.g1**2 + bv.g2**2))
        )
    rec["K_sum"] = rec["k1"] + rec["k2"] + rec["k3"] + rec["k4"] + rec["k5"] + rec["k6"]
    return rec


def monotonicity_M(field_, medium, center, r, kind, n_arc=4096):
    """I(r), J(r), M(r) and the kind's K error terms at one radius."""
    return monotonicity_record(field_, medium, center, r, kind, n_arc=n_arc)


# ---------------------------------------------------------------------------
# identities
# ---------------------------------------------------------------------------

def pohozaev_residual(field_, medium, center, r, kind, n_arc=4096):
    """Left minus right side of the kind's Pohozaev identity, with scale."""
    check_kind_center(kind, center)
    rec = monotonicity_record(field_, medium, center, r, kind, n_arc=n_arc)
    lhs_coeff = {"stagnation": 3.0, "axis": 3.0, "origin": 4.0}[kind]
    dir_coeff = {"stagnation": 3.0, "axis": 4.0, "origin": 5.0}[kind]
    lhs = lhs_coeff * rec["E_F"] - r * rec["E_F_arc"]
    if kind == "stagnation":
        ksum = rec["k1"] + rec["k2"] + rec["k3"]
    elif kind == "axis":
        ksum = rec["k1"]
    else:
        ksum = rec["k1"] + rec["k2"]
    rhs = dir_coeff * rec["dirichlet"] - 2.0 * r * rec["arc_un_sq"] - ksum
    scale = abs(lhs) + abs(dir_coeff * rec["dirichlet"]) + abs(2.0 * r * rec["arc_un_sq"]) + abs(ksum)
    return {"lhs": lhs, "rhs": rhs, "residual": lhs - rhs, "scale": max(scale, 1e-300)}


def energy_identity_residual(field_, medium, center, r, kind, n_arc=4096):
    """|bulk weighted Dirichlet energy - boundary flux| for the kind's ball."""
    check_kind_center(kind, center)
    rec = monotonicity_record(field_, medium, center, r, kind, n_arc=n_arc)
    resid = rec["dirichlet"] - rec["arc_uun"]
    scale = abs(rec["dirichlet"]) + abs(rec["arc_uun"])
    return {"residual": resid, "scale": max(scale, 1e-300)}


# ---------------------------------------------------------------------------
# radial sweeps
# ---------------------------------------------------------------------------

@dataclass
class RadialSweep:
    center: tuple
    kind: str
    radii: np.ndarray
    columns: dict = field(default_factory=dict)

    def col(self, name):
        return self.columns[name]


def radial_sweep(field_, medium, center, kind, radii, n_arc=4096, threads=1):
    """Monotonicity + frequency sweep over strictly increasing radii."""
    check_kind_center(kind, center)
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 2 or np.any(np.diff(radii) <= 0):
        raise DomainError("radii must be strictly increasing (need at least 2)")

    def work(r):
        return monotonicity_record(field_, medium, center, float(r), kind, n_arc=n_arc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            recs = list(ex.map(work, radii))
    else:
        recs = [work(r) for r in radii]

    keys = sorted(recs[0].keys())
    cols = {k: np.array([rec.get(k, 0.0) for rec in recs]) for k in keys}
    sweep = RadialSweep(center=tuple(center), kind=kind, radii=radii, columns=cols)

    # centered finite-difference derivative of M on the (log-spaced) radii
    M = cols["M"]
    dM = np.full_like(M, np.nan)
    dM[1:-1] = (M[2:] - M[:-2]) / (radii[2:] - radii[:-2])
    cols["dM_fd"] = dM
    rhs = cols["square"] + cols["k_scale"] * cols["K_sum"]
    cols["dM_rhs"] = rhs

    if kind == "origin":
        _attach_frequency(sweep, medium)
    return sweep


def _cumtrapz0(radii, f):
    """Cumulative trapezoid from r = 0 with the integrand extended by 0 there."""
    r = np.concatenate(([0.0], radii))
    g = np.concatenate(([0.0], f))
    out = np.concatenate(([0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(r))))
    return out[1:]


def _attach_frequency(sweep: RadialSweep, medium):
    r = sweep.radii
    c = sweep.columns
    J = c["J"]
    K1 = c["k1"]
    Ko = c["k2"] + c["k3"] + c["k4"]
    cum_k1 = _cumtrapz0(r, K1 / r**5)
    cum_ko = _cumtrapz0(r, Ko / r**5)
    e = r * K1 + r**5 * (cum_k1 + cum_ko)
    Pi = _cumtrapz0(r, c["S_void"] / r**4)
    with np.errstate(divide="ignore", invalid="ignore"):
        D = np.where(J > 0, r * c["dirichlet"] / J, np.nan)
        Vplus = np.where(J > 0, r * c["S_void"] / (medium.rho0 * J), np.nan)
        Vtilde = np.where(J > 0, e / J, np.nan)
        vm2 = np.where(J > 0, r * c["grad_w_norm"] / (medium.rho0 * J), np.nan)
    V = Vplus + Vtilde
    c["D"] = D
    c["V_plus"] = Vplus
    c["V_tilde"] = Vtilde
    c["V"] = V
    c["N"] = D - V
    c["e"] = e
    c["Pi"] = Pi
    c["J_scaled"] = J / r**5
    c["grad_vm_norm_sq"] = vm2


def frequency_quantities(field_, medium, center, radii, n_arc=4096, threads=1):
    """Frequency sweep D, V, N, e, V+, Vtilde, script-J, Pi at the origin.

    Raises FrequencyUndefinedError if J vanishes at any radius.
    """
    if tuple(center) != (0.0, 0.0):
        raise DomainError("frequency quantities are defined at the origin kind")
    sweep = radial_sweep(field_, medium, center, "origin", radii, n_arc=n_arc, threads=threads)
    if np.any(sweep.columns["J"] <= 0.0):
        bad = sweep.radii[np.argmax(sweep.columns["J"] <= 0.0)]
        raise FrequencyUndefinedError(f"J(r) = 0 at r = {bad}")
    return sweep


def monotonicity_derivative_check(field_, medium, center, kind, radii, n_arc=4096):
    """Max |finite-difference M' - (square + scaled K sum)| over the radii."""
    radii = np.asarray(radii, dtype=float)
    if radii.size < 5:
        raise DomainError("need at least 5 radii for the derivative check")
    sweep = radial_sweep(field_, medium, center, kind, radii, n_arc=n_arc)
    resid = sweep.columns["dM_fd"] - sweep.columns["dM_rhs"]
    inner = resid[1:-1]
    return {
        "sweep": sweep,
        "residuals": resid,
        "max_residual": float(np.max(np.abs(inner))),
    }
