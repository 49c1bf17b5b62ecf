"""Minimal SVG line/scatter plots so scans can ship figures without a
plotting dependency; CSV is always emitted alongside for anything fancier."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["line_plot_svg"]

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 36, 52
_COLORS = ["#1f6feb", "#d1242f", "#1a7f37", "#8250df", "#bf8700", "#0d8a8a"]


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


def line_plot_svg(path, series, title: str = "", xlabel: str = "",
                  ylabel: str = "", logx: bool = False, logy: bool = False) -> None:
    """Write a line plot.  ``series`` is a list of (label, xs, ys)."""
    def tx(v):
        return math.log10(v) if logx else v

    def ty(v):
        return math.log10(v) if logy else v

    xs_all, ys_all = [], []
    for _, xs, ys in series:
        xs_all.extend(tx(float(v)) for v in xs)
        ys_all.extend(ty(float(v)) for v in ys)
    if not xs_all:
        raise ValueError("nothing to plot")
    xlo, xhi = min(xs_all), max(xs_all)
    ylo, yhi = min(ys_all), max(ys_all)
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    padx, pady = 0.04 * (xhi - xlo), 0.08 * (yhi - ylo)
    xlo, xhi, ylo, yhi = xlo - padx, xhi + padx, ylo - pady, yhi + pady

    def px(v):
        return _ML + (v - xlo) / (xhi - xlo) * (_W - _ML - _MR)

    def py(v):
        return _H - _MB - (v - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
             f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
             f'<rect width="{_W}" height="{_H}" fill="white"/>',
             f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>']

    # axes
    parts.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" '
                 'stroke="black"/>')
    parts.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>')
    for t in _ticks(xlo, xhi):
        x = px(t)
        label = f"{10 ** t:.3g}" if logx else f"{t:.3g}"
        parts.append(f'<line x1="{x}" y1="{_H - _MB}" x2="{x}" y2="{_H - _MB + 5}" stroke="black"/>')
        parts.append(f'<text x="{x}" y="{_H - _MB + 18}" text-anchor="middle">{label}</text>')
    for t in _ticks(ylo, yhi):
        y = py(t)
        label = f"{10 ** t:.3g}" if logy else f"{t:.3g}"
        parts.append(f'<line x1="{_ML - 5}" y1="{y}" x2="{_ML}" y2="{y}" stroke="black"/>')
        parts.append(f'<text x="{_ML - 8}" y="{y + 4}" text-anchor="end">{label}</text>')
    parts.append(f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="16" y="{_H / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {_H / 2})">{ylabel}</text>')

    for idx, (label, xs, ys) in enumerate(series):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{px(tx(float(a))):.2f},{py(ty(float(b))):.2f}"
                       for a, b in zip(np.atleast_1d(xs), np.atleast_1d(ys)))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     'stroke-width="1.8"/>')
        for a, b in zip(np.atleast_1d(xs), np.atleast_1d(ys)):
            parts.append(f'<circle cx="{px(tx(float(a))):.2f}" cy="{py(ty(float(b))):.2f}" '
                         f'r="2.6" fill="{color}"/>')
        if label:
            ylab = _MT + 16 * idx
            parts.append(f'<line x1="{_W - _MR - 120}" y1="{ylab}" x2="{_W - _MR - 96}" '
                         f'y2="{ylab}" stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{_W - _MR - 90}" y="{ylab + 4}">{label}</text>')

    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
