"""Dependency-free deterministic SVG histograms (640x480 fixed viewbox)."""

from __future__ import annotations

import math

import numpy as np

WIDTH = 640
HEIGHT = 480
MARGIN_L = 60
MARGIN_R = 20
MARGIN_T = 30
MARGIN_B = 40
MIN_BINS = 10


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def histogram_bins(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Counts and edges with Freedman-Diaconis width, at least MIN_BINS bins."""
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        edges = np.array([lo - 0.5, lo + 0.5])
        return np.array([values.size]), edges
    q1, q3 = np.percentile(values, [25, 75])
    iqr = q3 - q1
    if iqr > 0:
        width = 2.0 * iqr / values.size ** (1.0 / 3.0)
        nbins = max(MIN_BINS, int(math.ceil((hi - lo) / width)))
    else:
        nbins = MIN_BINS
    nbins = min(nbins, 512)
    counts, edges = np.histogram(values, bins=nbins, range=(lo, hi))
    return counts, edges


def emit_svg(values, path, title: str = "") -> None:
    """Write a self-contained histogram SVG; byte output is deterministic."""
    values = np.asarray(values, dtype=float).ravel()
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black" stroke-width="1"/>'
    )
    if title:
        parts.append(
            f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" '
            f'font-family="monospace" font-size="14">{title}</text>'
        )
    if values.size:
        counts, edges = histogram_bins(values)
        cmax = max(int(counts.max()), 1)
        lo, hi = edges[0], edges[-1]
        span = hi - lo if hi > lo else 1.0
        for i, cnt in enumerate(counts):
            if cnt == 0:
                continue
            bx0 = x0 + (edges[i] - lo) / span * (x1 - x0)
            bx1 = x0 + (edges[i + 1] - lo) / span * (x1 - x0)
            h = cnt / cmax * (y0 - y1)
            parts.append(
                f'<rect x="{_fmt(bx0)}" y="{_fmt(y0 - h)}" width="{_fmt(max(bx1 - bx0, 0.5))}" '
                f'height="{_fmt(h)}" fill="steelblue" stroke="black" stroke-width="0.4"/>'
            )
        for frac in (0.0, 0.5, 1.0):
            tx = x0 + frac * (x1 - x0)
            label = _fmt(lo + frac * span)
            parts.append(
                f'<text x="{_fmt(tx)}" y="{y0 + 18}" text-anchor="middle" '
                f'font-family="monospace" font-size="11">{label}</text>'
            )
        parts.append(
            f'<text x="{x0 - 8}" y="{y1 + 6}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{cmax}</text>'
        )
        parts.append(
            f'<text x="{x0 - 8}" y="{y0}" text-anchor="end" '
            f'font-family="monospace" font-size="11">0</text>'
        )
    svg = "\n".join(parts) + "\n</svg>\n"
    from .experiments import _atomic_write

    _atomic_write(str(path), svg)
