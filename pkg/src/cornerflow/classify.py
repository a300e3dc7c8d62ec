"""Blow-up rescaling, weighted densities, and the trichotomy classifier.

The classifier works in the normalized density frame (sqrt(3)/3, 2/3,
1/8, m0, 0); physical factors such as x1/rho0 are applied only when
reporting.  At axis points the density 2/3 is shared by the parabola
profile and the trivial full-positivity case, so the blow-up norm
breaks the tie (the trivial case is flagged as such).
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousMatchError,
    DomainError,
    GeometryError,
    InsufficientDataError,
)
from .fields import AnalyticField, GridField
from .functionals import SCALING_POWER, check_kind_center
from .profiles import eval_profile, flat_origin, theta_star_constants
from .quadrature import ball_nodes, polar_arc_nodes

NORM_THRESHOLD = 0.05  # blow-up norm below this fraction of the unit shape => trivial


@dataclass(frozen=True)
class DegeneratePoint:
    """A degenerate free-boundary point with its kind and scaling exponent."""

    x1: float
    x2: float
    kind: str = None  # type: ignore[assignment]

    def __post_init__(self):
        kind = self.kind
        if kind is None:
            if self.x1 == 0.0 and self.x2 == 0.0:
                kind = "origin"
            elif self.x2 == 0.0 and self.x1 > 0.0:
                kind = "stagnation"
            elif self.x1 == 0.0 and self.x2 > 0.0:
                kind = "axis"
            else:
                raise DomainError("degenerate points satisfy x1*x2 = 0")
            object.__setattr__(self, "kind", kind)
        check_kind_center(self.kind, (self.x1, self.x2))

    @property
    def coords(self):
        return (self.x1, self.x2)

    @property
    def exponent(self):
        return SCALING_POWER[self.kind]


def candidate_densities(kind):
    """Admissible normalized densities with their labels, per kind."""
    if kind == "stagnation":
        return [
            ("StokesCorner", math.sqrt(3.0) / 3.0),
            ("HorizontalFlat", 2.0 / 3.0),
            ("Cusp", 0.0),
        ]
    if kind == "axis":
        return [("AxisParabola", 2.0 / 3.0), ("Cusp", 0.0)]
    if kind == "origin":
        c = theta_star_constants()
        return [
            ("GarabedianBubble", c.m0),
            ("HorizontalFlat", 0.125),
            ("Cusp", 0.0),
        ]
    raise DomainError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# blow-up rescaling
# ---------------------------------------------------------------------------

def blowup(field_, point: DegeneratePoint, r, n=128):
    """Resampled rescaled field u(x0 + r x)/r^d on a unit-box grid."""
    if isinstance(field_, GridField):
        if r < 4.0 * field_.h:
            raise GeometryError("blow-up radius below 4h")
        if not field_.contains_ball(point.coords, r * math.sqrt(2.0), half=point.kind != "stagnation"):
            raise GeometryError("blow-up box leaves the grid")
    d = point.exponent
    hb = 2.0 / n
    x1_lo = -1.0 if point.kind == "stagnation" else 0.0
    nb1 = n if point.kind == "stagnation" else n // 2
    xi1 = x1_lo + (np.arange(nb1) + 0.5) * hb
    xi2 = -1.0 + (np.arange(n) + 0.5) * hb
    X1, X2 = np.meshgrid(xi1, xi2, indexing="ij")
    vals = field_.value(point.x1 + r * X1, point.x2 + r * X2) / r**d
    return GridField(x1_lo, 1.0, -1.0, 1.0, hb, vals)


# ---------------------------------------------------------------------------
# weighted density
# ---------------------------------------------------------------------------

def _density_at(field_, point, r):
    kind = point.kind
    half = kind != "stagnation"
    nodes = ball_nodes(field_, point.coords, r, half=half)
    u = field_.value(nodes.x1, nodes.x2)
    chi = field_.chi(u)
    if kind == "stagnation":
        val = np.sum(nodes.w * np.maximum(nodes.x2, 0.0) * chi) / r**3
    elif kind == "axis":
        val = np.sum(nodes.w * nodes.x1 * chi) / r**3
    else:
        val = np.sum(nodes.w * nodes.x1 * np.maximum(nodes.x2, 0.0) * chi) / r**4
    return float(val)


def weighted_density(field_, point: DegeneratePoint, radii):
    """Per-radius densities and an affine-in-r extrapolation to r = 0.

    The fit uses the smallest decade of the supplied radii; the
    reported uncertainty combines the fit spread with the extrapolation
    distance.  Needs at least 3 usable radii.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 3:
        raise InsufficientDataError("need at least 3 radii for extrapolation")
    radii = np.sort(radii)
    dens = np.array([_density_at(field_, point, r) for r in radii])
    use = radii <= radii[0] * 10.0
    ru, du = radii[use], dens[use]
    if ru.size >= 3:
        A = np.vstack([np.ones_like(ru), ru]).T
        coef, *_ = np.linalg.lstsq(A, du, rcond=None)
        a, b = coef
        spread = float(np.max(np.abs(du - (a + b * ru))))
        unc = 3.0 * spread + abs(b) * ru[0]
    else:
        a = du[0]
        unc = float(np.max(np.abs(du - a)))
    return {
        "radii": radii,
        "densities": dens,
        "value": float(a),
        "uncertainty": float(max(unc, 1e-12)),
    }


# ---------------------------------------------------------------------------
# profile fitting
# ---------------------------------------------------------------------------

def _fit_shape(blow: GridField, kind, label):
    """Least-squares coefficient and relative residual against the unit shape.

    Stagnation fits use plain L^2 on the blow-up box; axis/origin use
    the 1/x1-weighted norm natural to the half-plane.
    """
    X1, X2 = np.meshgrid(blow.cell_x1, blow.cell_x2, indexing="ij")
    inside = X1**2 + X2**2 <= 1.0
    if kind == "stagnation":
        w = np.where(inside, 1.0, 0.0)
    else:
        w = np.where(inside & (X1 > 0), 1.0 / np.maximum(X1, 1e-12), 0.0)
    u = blow.values
    if label == "StokesCorner":
        from .profiles import stokes_corner

        shape = eval_profile(stokes_corner(coeff=1.0), X1, X2)
    elif label == "AxisParabola":
        shape = X1 * X1
    elif label == "GarabedianBubble":
        from .profiles import garabedian_bubble

        shape = eval_profile(garabedian_bubble(beta0=1.0), X1, X2)
    elif label == "FlatOrigin":
        shape = X1 * X1 * np.maximum(X2, 0.0)
    else:
        raise DomainError(f"no fit shape for label {label!r}")
    num = float(np.sum(w * u * shape))
    den = float(np.sum(w * shape * shape))
    coeff = num / den if den > 0 else 0.0
    resid = u - coeff * shape
    rel = math.sqrt(float(np.sum(w * resid**2)) / max(float(np.sum(w * u**2)), 1e-300))
    return coeff, rel


def blowup_norm_ratio(blow: GridField, kind):
    """Blow-up L^2 size relative to the unit quadratic shape (axis tie-break)."""
    X1, X2 = np.meshgrid(blow.cell_x1, blow.cell_x2, indexing="ij")
    inside = X1**2 + X2**2 <= 1.0
    w = np.where(inside & (X1 > 0), 1.0 / np.maximum(X1, 1e-12), 0.0)
    nu = math.sqrt(float(np.sum(w * blow.values**2)))
    ns = math.sqrt(float(np.sum(w * (X1 * X1) ** 2)))
    return nu / max(ns, 1e-300)


@dataclass
class Classification:
    kind: str
    density: float
    uncertainty: float
    label: str
    nearest_density: float
    gap: float
    fit_param: float = None
    fit_residual: float = None
    candidates: list = field(default_factory=list)
    notes: str = ""

    def to_dict(self):
        return {
            "kind": self.kind,
            "density": self.density,
            "uncertainty": self.uncertainty,
            "label": self.label,
            "nearest_density": self.nearest_density,
            "gap": self.gap,
            "fit_param": self.fit_param,
            "fit_residual": self.fit_residual,
            "candidates": self.candidates,
            "notes": self.notes,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def classify(field_, point: DegeneratePoint, radii=None, n_blow=128, strict=False):
    """Trichotomy classification by nearest weighted density.

    With ``strict=True`` an ambiguous match raises AmbiguousMatchError;
    otherwise the label is reported as "Ambiguous" with the candidate
    table attached (never a forced label).
    """
    if radii is None:
        h = getattr(field_, "h", 1.0 / 256.0)
        delta = field_.boundary_distance(point.coords, half=point.kind != "stagnation")
        if point.kind == "stagnation":
            delta = min(delta, point.x1)
        r_hi = 0.45 * delta
        if not r_hi > 4 * h:
            raise GeometryError("no usable radius window around the point")
        radii = np.geomspace(max(4 * h, r_hi / 8.0), r_hi, 10)
    meas = weighted_density(field_, point, radii)
    d, unc = meas["value"], meas["uncertainty"]
    cands = sorted(candidate_densities(point.kind), key=lambda kv: abs(kv[1] - d))
    label, dstar = cands[0]
    gap = abs(d - dstar)
    second_gap = abs(d - cands[1][1]) if len(cands) > 1 else np.inf
    notes = ""
    if second_gap - gap < 2.0 * unc:
        if strict:
            raise AmbiguousMatchError(
                f"density {d:.6g} +- {unc:.2g} sits between {cands[0][0]} and {cands[1][0]}"
            )
        cls = Classification(
            kind=point.kind,
            density=d,
            uncertainty=unc,
            label="Ambiguous",
            nearest_density=dstar,
            gap=gap,
            candidates=[[c, v] for c, v in cands],
            notes="two theoretical densities within twice the uncertainty",
        )
        return cls

    fit_param = None
    fit_resid = None
    r_fit = float(np.asarray(radii)[-1])
    r_lo = float(np.asarray(radii)[0])
    if label == "AxisParabola":
        # density 2/3 is shared with the trivial (u_0 = 0) axis case; the
        # blow-up norm separates them: it is r-independent for the
        # parabola and decays for a trivial point
        blow_lo = blowup(field_, point, r_lo, n=n_blow)
        blow_hi = blowup(field_, point, r_fit, n=n_blow)
        ratio_lo = blowup_norm_ratio(blow_lo, point.kind)
        ratio_hi = blowup_norm_ratio(blow_hi, point.kind)
        decaying = ratio_hi > 0 and ratio_lo / max(ratio_hi, 1e-300) < 0.6
        if ratio_lo < NORM_THRESHOLD or decaying:
            label = "HorizontalFlat"
            notes = (
                "density 2/3 with vanishing blow-up norm: trivial axis point "
                "(the trivial 2/3 case is not excluded by the theory)"
            )
        else:
            fit_param, fit_resid = _fit_shape(blow_hi, point.kind, "AxisParabola")
    elif label in ("StokesCorner", "GarabedianBubble"):
        blow = blowup(field_, point, r_fit, n=n_blow)
        fit_param, fit_resid = _fit_shape(blow, point.kind, label)
    return Classification(
        kind=point.kind,
        density=d,
        uncertainty=unc,
        label=label,
        nearest_density=dstar,
        gap=gap,
        fit_param=fit_param,
        fit_residual=fit_resid,
        candidates=[[c, v] for c, v in cands],
        notes=notes,
    )


# ---------------------------------------------------------------------------
# frequency blow-ups
# ---------------------------------------------------------------------------

def frequency_blowup(field_, medium, radii, n_blow=128, annulus=(0.5, 0.9)):
    """Normalized blow-ups v_r = u(r x)/||u||_w with fit and homogeneity checks.

    Returns per-radius records with the boundary-norm check, the fit
    coefficient/residual against the flat profile, the measured N(r),
    and the annulus homogeneity deficit (the weighted square of
    grad v . x - N v, which decays when the limit is homogeneous).
    """
    from .functionals import frequency_quantities
    from .quadrature import polar_ball_nodes

    radii = np.asarray(sorted(radii), dtype=float)
    sweep = frequency_quantities(field_, medium, (0.0, 0.0), radii)
    J = sweep.columns["J"]
    N = sweep.columns["N"]
    N0 = float(N[0])
    flat = flat_origin()
    splits = tuple(getattr(field_, "rays_phi", ())) + (0.0,)
    arc = polar_arc_nodes((0.0, 0.0), 1.0, splits=splits, half=True)
    pn = polar_ball_nodes((0.0, 0.0), 1.0, splits=splits, half=True)
    shape = eval_profile(flat, pn.x1, pn.x2)
    wgt = pn.w / np.maximum(pn.x1, 1e-12)
    ann = (pn.x1**2 + pn.x2**2) >= annulus[0] ** 2
    out = []
    for i, r in enumerate(radii):
        c = math.sqrt(medium.rho0 * J[i])
        # boundary-norm check: the normalization makes it 1 by construction
        vr_arc = field_.value(r * arc.x1, r * arc.x2) / c
        norm = math.sqrt(float(np.sum(arc.w * vr_arc**2 / np.maximum(arc.x1, 1e-300))))
        # blow-up values/gradient on the unit half-ball
        vr = field_.value(r * pn.x1, r * pn.x2) / c
        g1, g2 = field_.gradient(r * pn.x1, r * pn.x2)
        g1 = r * g1 / c
        g2 = r * g2 / c
        num = float(np.sum(wgt * vr * shape))
        den = float(np.sum(wgt * shape * shape))
        coeff = num / den
        rel = math.sqrt(
            float(np.sum(wgt * (vr - coeff * shape) ** 2))
            / max(float(np.sum(wgt * vr**2)), 1e-300)
        )
        rad = g1 * pn.x1 + g2 * pn.x2
        rr = np.hypot(pn.x1, pn.x2)
        # homogeneity deficit with the local frequency N(r) standing in for
        # its limit (the limit is unknown at finite radius)
        kern = np.where(
            ann, (rad - float(N[i]) * vr) ** 2 / np.maximum(pn.x1, 1e-12) / rr**6, 0.0
        )
        deficit = float(np.sum(pn.w * kern))
        out.append(
            {
                "r": float(r),
                "boundary_norm": norm,
                "fit_coeff": coeff,
                "fit_residual": rel,
                "N": float(N[i]),
                "deficit": deficit,
            }
        )
    return {"records": out, "sweep": sweep, "N0": N0}


def homogeneous_replacement(field_, degree, n_theta=2048):
    """Degree-d homogeneous extension of the field's unit-half-circle trace."""
    phi = np.linspace(-0.5 * np.pi, 0.5 * np.pi, n_theta)
    trace = field_.value(np.cos(phi), np.sin(phi))

    def fn(x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        rr = np.hypot(x1, x2)
        ang = np.arctan2(x2, np.maximum(x1, 0.0))
        vals = np.interp(ang, phi, trace)
        return np.where(rr > 0, rr**degree * vals, 0.0)

    def grad(x1, x2, d=1e-6):
        return (
            (fn(x1 + d, x2) - fn(x1 - d, x2)) / (2 * d),
            (fn(x1, x2 + d) - fn(x1, x2 - d)) / (2 * d),
        )

    return AnalyticField(fn, grad, apex=(0.0, 0.0), rays_phi=(0.0,))


def measure_corner_slopes(blow: GridField, band=(0.15, 0.9)):
    """Free-boundary ray slopes x2/x1 of a Stokes-corner blow-up."""
    X1, X2 = np.meshgrid(blow.cell_x1, blow.cell_x2, indexing="ij")
    chi = blow.chi(blow.values)
    edge = chi & (
        ~np.roll(chi, 1, axis=0)
        | ~np.roll(chi, -1, axis=0)
        | ~np.roll(chi, 1, axis=1)
        | ~np.roll(chi, -1, axis=1)
    )
    edge[[0, -1], :] = False
    edge[:, [0, -1]] = False
    rr = np.hypot(X1, X2)
    sel = edge & (rr > band[0]) & (rr < band[1]) & (X2 > 0)
    slopes = []
    for side in (X1[sel] > 0, X1[sel] < 0):
        x1s = X1[sel][side]
        x2s = X2[sel][side]
        if x1s.size >= 3:
            slopes.append(float(np.sum(x2s * x1s) / np.sum(x1s * x1s)))
    return sorted(slopes)  # sigma2/sigma1 per ray; +-1/sqrt(3) for the corner
