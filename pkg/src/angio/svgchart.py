"""Minimal deterministic SVG line charts.

Hand-rolled on purpose: the plot command promises byte-identical output for
identical input, which rules out toolkit backends that embed timestamps,
generated ids, or environment-dependent layout.  Only fixed-point decimals
and the input data enter the output.
"""

from __future__ import annotations

import math

WIDTH = 720.0
HEIGHT = 480.0
MARGIN_LEFT = 64.0
MARGIN_RIGHT = 16.0
MARGIN_TOP = 20.0
MARGIN_BOTTOM = 48.0

SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _padded(lo: float, hi: float) -> tuple[float, float]:
    if hi > lo:
        pad = 0.04 * (hi - lo)
        return lo - pad, hi + pad
    pad = max(1e-9, 0.05 * abs(lo))
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    span = hi - lo
    raw = span / target
    mag = math.pow(10.0, math.floor(math.log10(raw)))
    step = 10.0 * mag
    for mult in (1.0, 2.0, 2.5, 5.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(v) < 1e-12 * span else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def render_line_chart(t: list[float], series: list[tuple[str, list[float]]],
                      x_label: str = "t") -> str:
    """Render labeled series against a shared time axis; returns SVG text."""
    if not t or any(len(vals) != len(t) for _, vals in series):
        raise ValueError("series must be non-empty and match the time axis length")

    t_lo, t_hi = _padded(min(t), max(t))
    all_vals = [v for _, vals in series for v in vals]
    y_lo, y_hi = _padded(min(all_vals), max(all_vals))

    x0, x1 = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    y0, y1 = HEIGHT - MARGIN_BOTTOM, MARGIN_TOP
    sx = (x1 - x0) / (t_hi - t_lo)
    sy = (y1 - y0) / (y_hi - y_lo)

    def px(v: float) -> float:
        return x0 + (v - t_lo) * sx

    def py(v: float) -> float:
        return y0 + (v - y_lo) * sy

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0f}" '
        f'height="{HEIGHT:.0f}" viewBox="0 0 {WIDTH:.0f} {HEIGHT:.0f}">',
        f'<rect x="0" y="0" width="{WIDTH:.0f}" height="{HEIGHT:.0f}" fill="#ffffff"/>',
        f'<rect x="{x0:.2f}" y="{y1:.2f}" width="{x1 - x0:.2f}" '
        f'height="{y0 - y1:.2f}" fill="none" stroke="#444444" stroke-width="1"/>',
    ]

    for tick in _ticks(t_lo, t_hi):
        x = px(tick)
        parts.append(f'<line x1="{x:.2f}" y1="{y0:.2f}" x2="{x:.2f}" '
                     f'y2="{y0 + 5:.2f}" stroke="#444444" stroke-width="1"/>')
        parts.append(f'<text x="{x:.2f}" y="{y0 + 19:.2f}" font-family="sans-serif" '
                     f'font-size="12" fill="#222222" text-anchor="middle">{_fmt(tick)}</text>')
    for tick in _ticks(y_lo, y_hi):
        y = py(tick)
        parts.append(f'<line x1="{x0 - 5:.2f}" y1="{y:.2f}" x2="{x0:.2f}" '
                     f'y2="{y:.2f}" stroke="#444444" stroke-width="1"/>')
        parts.append(f'<text x="{x0 - 9:.2f}" y="{y + 4:.2f}" font-family="sans-serif" '
                     f'font-size="12" fill="#222222" text-anchor="end">{_fmt(tick)}</text>')

    parts.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - 10:.2f}" '
                 f'font-family="sans-serif" font-size="13" fill="#222222" '
                 f'text-anchor="middle">{x_label}</text>')

    for idx, (label, vals) in enumerate(series):
        color = SERIES_COLORS[idx % len(SERIES_COLORS)]
        points = " ".join(f"{px(tv):.2f},{py(v):.2f}" for tv, v in zip(t, vals))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{points}"/>')

    legend_x = x1 - 70.0
    for idx, (label, _) in enumerate(series):
        color = SERIES_COLORS[idx % len(SERIES_COLORS)]
        ly = y1 + 14.0 + 18.0 * idx
        parts.append(f'<line x1="{legend_x:.2f}" y1="{ly:.2f}" x2="{legend_x + 22:.2f}" '
                     f'y2="{ly:.2f}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{legend_x + 28:.2f}" y="{ly + 4:.2f}" '
                     f'font-family="sans-serif" font-size="12" fill="#222222">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
