"""Minimal deterministic SVG line plots (no plotting dependency)."""

import math

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-12 * span:
        out.append(v)
        v += step
    return out


def write_svg_lines(path, xs, series, title="", xlabel="", ylabel="", logx=False):
    """Write polyline series ([(label, ys), ...]) against xs to an SVG file."""
    xv = [math.log10(x) for x in xs] if logx else list(xs)
    ys_all = [y for _, ys in series for y in ys if y == y and abs(y) != float("inf")]
    if not ys_all:
        ys_all = [0.0, 1.0]
    ylo, yhi = min(ys_all), max(ys_all)
    if yhi == ylo:
        ylo -= 0.5
        yhi += 0.5
    pad = 0.05 * (yhi - ylo)
    ylo -= pad
    yhi += pad
    xlo, xhi = min(xv), max(xv)
    if xhi == xlo:
        xhi = xlo + 1.0

    def sx(x):
        return _ML + (x - xlo) / (xhi - xlo) * (_W - _ML - _MR)

    def sy(y):
        return _H - _MB - (y - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>'
        )
    for tv in _ticks(xlo, xhi):
        x = sx(tv)
        label = f"1e{tv:.0f}" if logx else f"{tv:.4g}"
        parts.append(
            f'<line x1="{x:.2f}" y1="{_H - _MB}" x2="{x:.2f}" y2="{_H - _MB + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_H - _MB + 18}" text-anchor="middle" font-size="11">{label}</text>'
        )
    for tv in _ticks(ylo, yhi):
        y = sy(tv)
        parts.append(
            f'<line x1="{_ML - 5}" y1="{y:.2f}" x2="{_ML}" y2="{y:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{tv:.4g}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" font-size="12">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="18" y="{_H / 2:.1f}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 18 {_H / 2:.1f})">{ylabel}</text>'
        )
    for k, (label, ys) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(
            f"{sx(x):.2f},{sy(y):.2f}"
            for x, y in zip(xv, ys)
            if y == y and abs(y) != float("inf")
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_W - _MR - 8}" y="{_MT + 16 + 14 * k}" text-anchor="end" '
            f'font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")


def write_svg_levels(path, field, levels=(0.25, 0.5, 0.75), title=""):
    """Scatter the cells nearest to each level set of a grid field."""
    import numpy as np

    vals = field.values
    vmax = float(np.max(vals)) if vals.size else 0.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>'
        )

    def sx(x):
        return _ML + (x - field.x1_min) / (field.x1_max - field.x1_min) * (_W - _ML - _MR)

    def sy(y):
        return _H - _MB - (y - field.x2_min) / (field.x2_max - field.x2_min) * (_H - _MT - _MB)

    x1 = field.cell_x1
    x2 = field.cell_x2
    for k, lv in enumerate(levels):
        color = _COLORS[k % len(_COLORS)]
        target = lv * vmax
        band = 0.6 * field.h * max(vmax, 1e-300)
        ii, jj = np.nonzero(np.abs(vals - target) < band)
        for i, j in zip(ii.tolist(), jj.tolist()):
            parts.append(
                f'<circle cx="{sx(x1[i]):.2f}" cy="{sy(x2[j]):.2f}" r="1.2" fill="{color}"/>'
            )
    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")
