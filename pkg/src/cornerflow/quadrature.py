"""Quadrature node generators for balls and arcs in the half-plane.

Two backends share one node layout convention:

* grid fields: cell-wise midpoint with partial-cell area weights for
  cells cut by the circle (4x4 sub-sampling), trapezoid rule on arcs
  with bilinear interpolation;
* analytic fields: polar Gauss-Legendre panels split at the field's
  kink rays, so cone indicators and |grad u| kinks never cross a panel.

Volume node sets carry two weight vectors: ``w`` for plain area
integrals and ``w_inv`` for integrands with a 1/x1 factor, where the
per-cell integral of 1/x1 is taken exactly across the cell width.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .fields import AnalyticField, GridField

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (8, 16, 24, 32, 48)}


@dataclass
class BallNodes:
    x1: np.ndarray
    x2: np.ndarray
    w: np.ndarray
    w_inv: np.ndarray


@dataclass
class ArcNodes:
    x1: np.ndarray
    x2: np.ndarray
    w: np.ndarray
    n1: np.ndarray
    n2: np.ndarray


# ---------------------------------------------------------------------------
# polar backend (analytic fields)
# ---------------------------------------------------------------------------

def _angle_panels(center, r, splits, half):
    lo, hi = (-0.5 * np.pi, 0.5 * np.pi) if half else (-np.pi, np.pi)
    cuts = {lo, hi}
    for a in splits:
        a = (a + np.pi) % (2.0 * np.pi) - np.pi
        if lo + 1e-14 < a < hi - 1e-14:
            cuts.add(a)
        if not half and abs(a - np.pi) < 1e-14:
            pass  # seam already a panel edge
    edges = np.array(sorted(cuts))
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def polar_ball_nodes(center, r, splits=(), half=False, nr=48, nt=32):
    c1, c2 = center
    xr, wr = _GL[nr if nr in _GL else 48]
    rho = 0.5 * r * (xr + 1.0)
    wrho = 0.5 * r * wr
    xt, wt = _GL[nt if nt in _GL else 32]
    xs, ys, ws = [], [], []
    for a, b in _angle_panels(center, r, splits, half):
        phi = 0.5 * (b - a) * xt + 0.5 * (a + b)
        wphi = 0.5 * (b - a) * wt
        R, P = np.meshgrid(rho, phi, indexing="ij")
        W = np.outer(wrho * rho, wphi)
        xs.append((c1 + R * np.cos(P)).ravel())
        ys.append((c2 + R * np.sin(P)).ravel())
        ws.append(W.ravel())
    x1 = np.concatenate(xs)
    x2 = np.concatenate(ys)
    w = np.concatenate(ws)
    keep = x1 > 0.0
    if half and not np.all(keep):
        x1, x2, w = x1[keep], x2[keep], w[keep]
    return BallNodes(x1=x1, x2=x2, w=w, w_inv=w / x1)


def polar_arc_nodes(center, r, splits=(), half=False, nt=48):
    c1, c2 = center
    xt, wt = _GL[nt if nt in _GL else 48]
    xs, ys, ws, ns1, ns2 = [], [], [], [], []
    for a, b in _angle_panels(center, r, splits, half):
        phi = 0.5 * (b - a) * xt + 0.5 * (a + b)
        wphi = 0.5 * (b - a) * wt * r
        xs.append(c1 + r * np.cos(phi))
        ys.append(c2 + r * np.sin(phi))
        ws.append(wphi)
        ns1.append(np.cos(phi))
        ns2.append(np.sin(phi))
    return ArcNodes(
        x1=np.concatenate(xs),
        x2=np.concatenate(ys),
        w=np.concatenate(ws),
        n1=np.concatenate(ns1),
        n2=np.concatenate(ns2),
    )


# ---------------------------------------------------------------------------
# grid backend
# ---------------------------------------------------------------------------

def _corner_area(x, y, r):
    """Area of disk(0, r) intersected with {X <= x, Y <= y} (vectorized)."""
    x = np.clip(x, -r, r)
    y = np.clip(y, -r, r)

    def F(X):
        X = np.clip(X, -r, r)
        return 0.5 * (X * np.sqrt(np.maximum(r * r - X * X, 0.0))
                      + r * r * np.arcsin(np.clip(X / r, -1.0, 1.0)))

    def W(a, b):
        b = np.maximum(a, b)
        return F(b) - F(a)

    xc = np.sqrt(np.maximum(r * r - y * y, 0.0))
    base = W(np.full_like(x, -r), x)
    # integral of clamp(y, -w, w): y on |X| < xc, +-w outside
    mid_lo = np.maximum(-xc, -r)
    mid_hi = np.minimum(x, xc)
    mid = y * np.maximum(mid_hi - mid_lo, 0.0)
    outer = W(np.full_like(x, -r), np.minimum(x, -xc)) + W(xc, x)
    return base + mid + np.sign(y) * outer


def _cell_fractions(cx, cy, h, center, r):
    """Exact covered-area fraction of each cell by the disk.

    Inclusion-exclusion of the corner areas keeps the cut-cell weights
    exact, so the midpoint rule retains its O(h^2) order (sub-sampled
    fractions would cap the boundary accuracy at O(h)).
    """
    x_lo = cx - 0.5 * h - center[0]
    x_hi = cx + 0.5 * h - center[0]
    y_lo = cy - 0.5 * h - center[1]
    y_hi = cy + 0.5 * h - center[1]
    area = (
        _corner_area(x_hi, y_hi, r)
        - _corner_area(x_lo, y_hi, r)
        - _corner_area(x_hi, y_lo, r)
        + _corner_area(x_lo, y_lo, r)
    )
    return np.clip(area / (h * h), 0.0, 1.0)


def grid_ball_nodes(field: GridField, center, r, half=False):
    if not field.contains_ball(center, r, half=half):
        raise GeometryError(f"ball (center={center}, r={r}) leaves the grid")
    h = field.h
    x1c = field.cell_x1
    x2c = field.cell_x2
    i_lo = max(0, int(np.floor((center[0] - r - field.x1_min) / h)) - 1)
    i_hi = min(field.n1, int(np.ceil((center[0] + r - field.x1_min) / h)) + 1)
    j_lo = max(0, int(np.floor((center[1] - r - field.x2_min) / h)) - 1)
    j_hi = min(field.n2, int(np.ceil((center[1] + r - field.x2_min) / h)) + 1)
    X1, X2 = np.meshgrid(x1c[i_lo:i_hi], x2c[j_lo:j_hi], indexing="ij")
    x1 = X1.ravel()
    x2 = X2.ravel()
    d2 = (x1 - center[0]) ** 2 + (x2 - center[1]) ** 2
    rin = r - 0.7072 * h
    frac = np.zeros_like(x1)
    full = d2 <= rin * rin if rin > 0 else np.zeros_like(d2, bool)
    frac[full] = 1.0
    cut = (~full) & (d2 <= (r + 0.7072 * h) ** 2)
    if np.any(cut):
        frac[cut] = _cell_fractions(x1[cut], x2[cut], h, center, r)
    keep = frac > 0.0
    x1, x2, frac = x1[keep], x2[keep], frac[keep]
    w = frac * h * h
    # exact cross-cell integral of 1/x1 (midpoint fallback at the axis cell)
    x1l = x1 - 0.5 * h
    x1r = x1 + 0.5 * h
    safe = x1l > 1e-3 * h
    inv_mean = np.empty_like(x1)
    inv_mean[safe] = np.log(x1r[safe] / x1l[safe]) / h
    inv_mean[~safe] = 1.0 / x1[~safe]
    return BallNodes(x1=x1, x2=x2, w=w, w_inv=frac * h * h * inv_mean)


def grid_arc_nodes(field: GridField, center, r, half=False, n_arc=4096):
    if not field.contains_ball(center, r, half=half):
        raise GeometryError(f"arc (center={center}, r={r}) leaves the grid")
    if half:
        phi = np.linspace(-0.5 * np.pi, 0.5 * np.pi, n_arc + 1)
    else:
        phi = np.linspace(-np.pi, np.pi, n_arc + 1)[:-1]
    x1 = center[0] + r * np.cos(phi)
    x2 = center[1] + r * np.sin(phi)
    w = np.full(phi.shape, 2.0 * np.pi * r / n_arc if not half else np.pi * r / n_arc)
    if half:
        w[0] *= 0.5
        w[-1] *= 0.5
    return ArcNodes(x1=x1, x2=x2, w=w, n1=np.cos(phi), n2=np.sin(phi))


def ball_nodes(field, center, r, half=False, n_arc=4096):
    if isinstance(field, AnalyticField):
        splits = _apex_splits(field, center)
        return polar_ball_nodes(center, r, splits=splits, half=half)
    return grid_ball_nodes(field, center, r, half=half)


def arc_nodes(field, center, r, half=False, n_arc=4096):
    if isinstance(field, AnalyticField):
        splits = _apex_splits(field, center)
        return polar_arc_nodes(center, r, splits=splits, half=half)
    return grid_arc_nodes(field, center, r, half=half, n_arc=n_arc)


def _apex_splits(field: AnalyticField, center):
    """Kink rays apply when the sweep is centered at the profile apex."""
    dx = abs(center[0] - field.apex[0]) + abs(center[1] - field.apex[1])
    base = (0.0, np.pi)  # x2-weight kinks at the horizontal through the center
    if dx < 1e-12:
        return tuple(field.rays_phi) + base
    return base


# ---------------------------------------------------------------------------
# fixed integrand selectors (CLI / tests convenience)
# ---------------------------------------------------------------------------

def _selector(name, medium):
    def x2p(x1, x2, u, chi):
        return np.maximum(x2, 0.0)

    table = {
        "one": lambda x1, x2, u, chi: np.ones_like(x1),
        "x2_plus": x2p,
        "x2_plus_chi": lambda x1, x2, u, chi: np.maximum(x2, 0.0) * chi,
        "x1": lambda x1, x2, u, chi: x1,
        "x1_chi": lambda x1, x2, u, chi: x1 * chi,
        "x1_x2_plus": lambda x1, x2, u, chi: x1 * np.maximum(x2, 0.0),
        "x1_x2_plus_chi": lambda x1, x2, u, chi: x1 * np.maximum(x2, 0.0) * chi,
    }
    if name not in table:
        raise KeyError(f"unknown integrand selector {name!r}")
    return table[name]


def integrate_ball(field, center, r, selector, half=False):
    """Midpoint/cut-cell (grid) or polar (analytic) ball integral."""
    nodes = ball_nodes(field, center, r, half=half)
    u = field.value(nodes.x1, nodes.x2)
    chi = field.chi(u)
    if selector == "u_sq_weighted":
        return float(np.sum(nodes.w_inv * u * u))
    fn = _selector(selector, None)
    return float(np.sum(nodes.w * fn(nodes.x1, nodes.x2, u, chi)))


def integrate_arc(field, center, r, selector, half=False, n_arc=4096):
    """Trapezoid (grid) or polar-panel (analytic) arc integral."""
    nodes = arc_nodes(field, center, r, half=half, n_arc=n_arc)
    u = field.value(nodes.x1, nodes.x2)
    chi = field.chi(u)
    if selector == "u_sq_weighted":
        safe = nodes.x1 > 1e-12
        out = np.zeros_like(u)
        out[safe] = u[safe] ** 2 / nodes.x1[safe]
        return float(np.sum(nodes.w * out))
    fn = _selector(selector, None)
    return float(np.sum(nodes.w * fn(nodes.x1, nodes.x2, u, chi)))
