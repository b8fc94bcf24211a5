"""Minimal standalone SVG line plots (no plotting dependency at run time).

Produces deterministic output: no timestamps or random ids, so re-running a
command yields byte-identical figures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

WIDTH = 720
HEIGHT = 460
MARGIN_L = 64
MARGIN_R = 16
MARGIN_T = 36
MARGIN_B = 46


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str
    color: str
    dashed: bool = False


def _nice_ticks(lo: float, hi: float, n: int = 5) -> List[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_plot(series: Sequence[Series], title: str = "",
              xlabel: str = "", ylabel: str = "",
              max_points: int = 4000) -> str:
    """Render line series into an SVG document string."""
    xs = np.concatenate([s.x for s in series])
    ys = np.concatenate([s.y for s in series])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo or 1.0) * pw

    def sy(v):
        return MARGIN_T + ph - (v - y_lo) / (y_hi - y_lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" '
        f'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>')
    for t in _nice_ticks(x_lo, x_hi):
        px = sx(t)
        parts.append(f'<line x1="{px:.2f}" y1="{MARGIN_T + ph}" '
                     f'x2="{px:.2f}" y2="{MARGIN_T + ph + 5}" stroke="#333"/>')
        parts.append(f'<text x="{px:.2f}" y="{MARGIN_T + ph + 20}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">{_fmt(t)}</text>')
    for t in _nice_ticks(y_lo, y_hi):
        py = sy(t)
        parts.append(f'<line x1="{MARGIN_L - 5}" y1="{py:.2f}" '
                     f'x2="{MARGIN_L}" y2="{py:.2f}" stroke="#333"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{py + 4:.2f}" '
                     f'text-anchor="end" font-family="sans-serif" '
                     f'font-size="11">{_fmt(t)}</text>')
    if xlabel:
        parts.append(f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 8}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="13">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{MARGIN_T + ph / 2:.1f}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="13" transform="rotate(-90 16 '
                     f'{MARGIN_T + ph / 2:.1f})">{ylabel}</text>')

    for s in series:
        x, y = np.asarray(s.x, float), np.asarray(s.y, float)
        if x.size > max_points:
            idx = np.linspace(0, x.size - 1, max_points).round().astype(int)
            x, y = x[idx], y[idx]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        parts.append(f'<polyline fill="none" stroke="{s.color}" '
                     f'stroke-width="1.4"{dash} points="{pts}"/>')

    # legend, top-right inside the plot area
    ly = MARGIN_T + 14
    for s in series:
        lx = MARGIN_L + pw - 150
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 26}" '
                     f'y2="{ly - 4}" stroke="{s.color}" stroke-width="1.6"{dash}/>')
        parts.append(f'<text x="{lx + 32}" y="{ly}" font-family="sans-serif" '
                     f'font-size="11">{s.label}</text>')
        ly += 15
    parts.append("</svg>")
    return "\n".join(parts)


def write_svg(path, svg: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
