"""Tiny self-contained SVG writer for coherence traces and distribution bars."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_W, _H = 960, 360
_MARGIN = 56
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _scale(vals, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return out_lo + (np.asarray(vals, dtype=float) - lo) * (out_hi - out_lo) / span


def _axes(title, x_label, y_label, x_lo, x_hi, y_lo, y_hi):
    parts = [
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - 12}" y2="{_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_MARGIN}" y2="{12}" stroke="black"/>',
        f'<text x="{_W // 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{_W // 2}" y="{_H - 10}" text-anchor="middle" font-size="12">{escape(x_label)}</text>',
        f'<text x="16" y="{_H // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {_H // 2})">{escape(y_label)}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        xp = _MARGIN + frac * (_W - 12 - _MARGIN)
        yp = _H - _MARGIN - frac * (_H - _MARGIN - 12)
        parts.append(f'<text x="{xp:.1f}" y="{_H - _MARGIN + 16}" text-anchor="middle" '
                     f'font-size="10">{xv:.4g}</text>')
        parts.append(f'<text x="{_MARGIN - 6}" y="{yp:.1f}" text-anchor="end" '
                     f'font-size="10">{yv:.4g}</text>')
    return parts


def line_chart(x, series, title="", x_label="", y_label="") -> str:
    """Polyline chart; ``series`` is a list of (label, y-array) pairs."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for _, y in series]
    y_lo = min(float(y.min()) for y in ys)
    y_hi = max(float(y.max()) for y in ys)
    pad = 0.05 * (y_hi - y_lo or 1.0)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    parts = _axes(title, x_label, y_label, float(x.min()), float(x.max()), y_lo, y_hi)
    for i, (label, y) in enumerate(series):
        xp = _scale(x, x.min(), x.max(), _MARGIN, _W - 12)
        yp = _scale(ys[i], y_lo, y_hi, _H - _MARGIN, 12)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xp, yp))
        color = _COLORS[i % len(_COLORS)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        parts.append(f'<text x="{_W - 140}" y="{28 + 16 * i}" font-size="12" '
                     f'fill="{color}">{escape(label)}</text>')
    body = "\n".join(parts)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">\n{body}\n</svg>\n')


def bar_chart(x, heights, title="", x_label="", y_label="") -> str:
    x = np.asarray(x, dtype=float)
    h = np.asarray(heights, dtype=float)
    y_hi = float(h.max()) * 1.05 or 1.0
    parts = _axes(title, x_label, y_label, float(x.min()), float(x.max()), 0.0, y_hi)
    xp = _scale(x, x.min() - 0.5, x.max() + 0.5, _MARGIN, _W - 12)
    width = max(1.0, 0.8 * (_W - 12 - _MARGIN) / max(x.size, 1))
    base = _H - _MARGIN
    for xi, hi in zip(xp, h):
        top = _scale([max(hi, 0.0)], 0.0, y_hi, base, 12)[0]
        parts.append(f'<rect x="{xi - width / 2:.2f}" y="{top:.2f}" width="{width:.2f}" '
                     f'height="{base - top:.2f}" fill="#1f77b4"/>')
    body = "\n".join(parts)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">\n{body}\n</svg>\n')


def stack_svgs(svgs: list[str]) -> str:
    """Concatenate chart blocks vertically into one document."""
    inner = []
    for i, svg in enumerate(svgs):
        start = svg.index(">") + 1
        end = svg.rindex("</svg>")
        inner.append(f'<g transform="translate(0 {i * _H})">{svg[start:end]}</g>')
    total_h = _H * len(svgs)
    body = "\n".join(inner)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{total_h}" '
            f'viewBox="0 0 {_W} {total_h}">\n{body}\n</svg>\n')
