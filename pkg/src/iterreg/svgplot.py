"""Minimal SVG line charts; CSV stays the canonical output format."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["line_chart"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")

MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 18, 42, 54


def _finite_pairs(xs, ys, logx, logy):
    out = []
    for x, y in zip(xs, ys):
        if not (math.isfinite(x) and math.isfinite(y)):
            continue
        if (logx and x <= 0) or (logy and y <= 0):
            continue
        out.append((float(x), float(y)))
    return out


def _ticks(lo, hi, log):
    if log:
        d0, d1 = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        step = max(1, (d1 - d0) // 6)
        return [10.0 ** d for d in range(d0, d1 + 1, step)]
    if hi == lo:
        return [lo]
    return list(np.linspace(lo, hi, 5))


def _fmt(v):
    return f"{v:.4g}"


def line_chart(path, series, title="", xlabel="", ylabel="", logx=False, logy=False,
               width=760, height=480, markers=()):
    """Write a line chart to ``path``.

    ``series`` is a list of (label, xs, ys); non-finite and non-positive (on
    log scales) points are dropped. ``markers`` is a list of (label, x, y)
    highlighted points.
    """
    data = [(label, _finite_pairs(xs, ys, logx, logy)) for label, xs, ys in series]
    pts = [p for _, pairs in data for p in pairs]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    x0, x1 = MARGIN_L, width - MARGIN_R
    y0, y1 = height - MARGIN_B, MARGIN_T

    if not pts:
        parts.append(f'<text x="{width / 2:.1f}" y="{height / 2:.1f}" text-anchor="middle">no data</text>')
        parts.append("</svg>")
        with open(path, "w") as fh:
            fh.write("\n".join(parts))
        return

    xs_all = [p[0] for p in pts]
    ys_all = [p[1] for p in pts]
    xlo, xhi = min(xs_all), max(xs_all)
    ylo, yhi = min(ys_all), max(ys_all)
    if not logx and xhi == xlo:
        xlo, xhi = xlo - 1.0, xhi + 1.0
    if not logy and yhi == ylo:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    if logx and xhi == xlo:
        xlo, xhi = xlo / 10.0, xhi * 10.0
    if logy and yhi == ylo:
        ylo, yhi = ylo / 10.0, yhi * 10.0

    def sx(v):
        t = ((math.log10(v) - math.log10(xlo)) / (math.log10(xhi) - math.log10(xlo))
             if logx else (v - xlo) / (xhi - xlo))
        return x0 + t * (x1 - x0)

    def sy(v):
        t = ((math.log10(v) - math.log10(ylo)) / (math.log10(yhi) - math.log10(ylo))
             if logy else (v - ylo) / (yhi - ylo))
        return y0 - t * (y0 - y1)

    for tx in _ticks(xlo, xhi, logx):
        if tx < xlo or tx > xhi:
            continue
        parts.append(f'<line x1="{sx(tx):.1f}" y1="{y0}" x2="{sx(tx):.1f}" y2="{y1}" '
                     'stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{sx(tx):.1f}" y="{y0 + 18}" text-anchor="middle">{_fmt(tx)}</text>')
    for ty in _ticks(ylo, yhi, logy):
        if ty < ylo or ty > yhi:
            continue
        parts.append(f'<line x1="{x0}" y1="{sy(ty):.1f}" x2="{x1}" y2="{sy(ty):.1f}" '
                     'stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{x0 - 6}" y="{sy(ty) + 4:.1f}" text-anchor="end">{_fmt(ty)}</text>')
    parts.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
                 'fill="none" stroke="#333333"/>')
    parts.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{height - 14}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="18" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {(y0 + y1) / 2:.1f})">{escape(ylabel)}</text>')

    for i, (label, pairs) in enumerate(data):
        if not pairs:
            continue
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pairs)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = MARGIN_T + 14 + 16 * i
        parts.append(f'<line x1="{x1 - 130}" y1="{ly - 4}" x2="{x1 - 106}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{x1 - 100}" y="{ly}">{escape(str(label))}</text>')

    for label, mx, my in markers:
        if not (math.isfinite(mx) and math.isfinite(my)):
            continue
        if (logx and mx <= 0) or (logy and my <= 0):
            continue
        parts.append(f'<circle cx="{sx(mx):.2f}" cy="{sy(my):.2f}" r="3.5" fill="black"/>')
        if label:
            parts.append(f'<text x="{sx(mx) + 6:.2f}" y="{sy(my) - 6:.2f}" font-size="10">{escape(str(label))}</text>')

    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
