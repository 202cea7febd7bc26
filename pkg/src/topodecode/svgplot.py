"""Minimal self-contained SVG line plots for decoded-vs-truth figures."""

from __future__ import annotations

import numpy as np

__all__ = ["line_plot"]

_MARGIN = 50.0


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = np.linspace(lo, hi, n)
    return [float(v) for v in raw]


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return out_lo + (np.asarray(values, dtype=np.float64) - lo) / span * (out_hi - out_lo)


def line_plot(
    series,
    path,
    title="",
    xlabel="",
    ylabel="",
    width=900,
    height=360,
    y_range=None,
):
    """Write an SVG 1.1 line chart.

    ``series`` is a list of (label, x, y, css-color) tuples sharing axes.
    """
    xs = np.concatenate([np.asarray(s[1], dtype=np.float64) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=np.float64) for s in series])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    if y_range is not None:
        y_lo, y_hi = y_range
    else:
        y_lo, y_hi = float(ys.min()), float(ys.max())
        if y_hi == y_lo:
            y_hi = y_lo + 1.0
    plot_w, plot_h = width - 2 * _MARGIN, height - 2 * _MARGIN

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    # Axes box and ticks.
    parts.append(
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )
    for tx in _ticks(x_lo, x_hi):
        px = float(_scale([tx], x_lo, x_hi, _MARGIN, _MARGIN + plot_w)[0])
        parts.append(
            f'<line x1="{px:.1f}" y1="{_MARGIN + plot_h}" x2="{px:.1f}" '
            f'y2="{_MARGIN + plot_h + 4}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{_MARGIN + plot_h + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tx:.6g}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        py = float(_scale([ty], y_lo, y_hi, _MARGIN + plot_h, _MARGIN)[0])
        parts.append(
            f'<line x1="{_MARGIN - 4}" y1="{py:.1f}" x2="{_MARGIN}" '
            f'y2="{py:.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_MARGIN - 8}" y="{py + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{ty:.6g}</text>'
        )
    parts.append(
        f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    parts.append(
        f'<text x="14" y="{height / 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 14 {height / 2})">{ylabel}</text>'
    )
    # Series polylines and legend.
    for i, (label, x, y, color) in enumerate(series):
        px = _scale(x, x_lo, x_hi, _MARGIN, _MARGIN + plot_w)
        py = _scale(y, y_lo, y_hi, _MARGIN + plot_h, _MARGIN)
        points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" '
            f'stroke-width="1.2"/>'
        )
        lx = _MARGIN + 10 + 140 * i
        parts.append(
            f'<line x1="{lx}" y1="{_MARGIN - 12}" x2="{lx + 20}" '
            f'y2="{_MARGIN - 12}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 25}" y="{_MARGIN - 8}" font-family="sans-serif" '
            f'font-size="11">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
