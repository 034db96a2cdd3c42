"""Minimal standalone SVG charts: scatter with diagonal, histogram with a
density curve.  Each data mark carries its source values in ``data-x`` /
``data-y`` attributes, formatted exactly as in the companion CSV."""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .tables import fmt

WIDTH, HEIGHT = 640, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 60


def _ticks(lo: float, hi: float, count: int = 5) -> np.ndarray:
    span = hi - lo
    raw = span / count
    mag = 10 ** np.floor(np.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + step * 1e-9, step)


class _Canvas:
    def __init__(self, xlim, ylim, title, xlabel, ylabel):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.2f}" y="{TOP / 2 + 4:.2f}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        ]
        self._axes(xlabel, ylabel)

    def px(self, x):
        return LEFT + (np.asarray(x, float) - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)

    def py(self, y):
        return HEIGHT - BOTTOM - (np.asarray(y, float) - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)

    def _axes(self, xlabel, ylabel):
        xb, yb = HEIGHT - BOTTOM, LEFT
        p = self.parts
        p.append('<g class="axes" stroke="black" fill="none">')
        p.append(f'<line x1="{LEFT}" y1="{xb}" x2="{WIDTH - RIGHT}" y2="{xb}"/>')
        p.append(f'<line x1="{yb}" y1="{TOP}" x2="{yb}" y2="{xb}"/>')
        p.append("</g>")
        p.append('<g class="ticks" text-anchor="middle">')
        for t in _ticks(self.x0, self.x1):
            x = float(self.px(t))
            p.append(f'<line x1="{x:.2f}" y1="{xb}" x2="{x:.2f}" y2="{xb + 5}" stroke="black"/>')
            p.append(f'<text x="{x:.2f}" y="{xb + 18}">{t:g}</text>')
        for t in _ticks(self.y0, self.y1):
            y = float(self.py(t))
            p.append(f'<line x1="{yb - 5}" y1="{y:.2f}" x2="{yb}" y2="{y:.2f}" stroke="black"/>')
            p.append(f'<text x="{yb - 8}" y="{y + 4:.2f}" text-anchor="end">{t:g}</text>')
        p.append("</g>")
        p.append(f'<text x="{(LEFT + WIDTH - RIGHT) / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
        cy = (TOP + HEIGHT - BOTTOM) / 2
        p.append(
            f'<text x="18" y="{cy:.2f}" text-anchor="middle" transform="rotate(-90 18 {cy:.2f})">{escape(ylabel)}</text>'
        )

    def polyline(self, xs, ys, cls, color):
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(self.px(xs), self.py(ys)))
        self.parts.append(f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _padded(lo, hi, frac=0.05):
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    pad = (hi - lo) * frac
    return lo - pad, hi + pad


def scatter_svg(xs, ys, title="", xlabel="x", ylabel="y", diagonal=True) -> str:
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    lo = min(xs.min(), ys.min())
    hi = max(xs.max(), ys.max())
    lim = _padded(lo, hi)
    c = _Canvas(lim, lim, title, xlabel, ylabel)
    if diagonal:
        c.polyline(lim, lim, "diagonal", "gray")
    c.parts.append('<g class="points" fill="steelblue" fill-opacity="0.8">')
    for x, y, px, py in zip(xs, ys, c.px(xs), c.py(ys)):
        c.parts.append(
            f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3.5" data-x={quoteattr(fmt(x))} data-y={quoteattr(fmt(y))}/>'
        )
    c.parts.append("</g>")
    return c.render()


def histogram_svg(draws, bins, curve_x, curve_y, title="", xlabel="theta", ylabel="density") -> str:
    """Density-normalised histogram of ``draws`` overlaid with a curve."""
    heights, edges = np.histogram(np.asarray(draws, float), bins=bins, density=True)
    curve_x, curve_y = np.asarray(curve_x, float), np.asarray(curve_y, float)
    xlim = (min(edges[0], curve_x.min()), max(edges[-1], curve_x.max()))
    ylim = (0.0, max(heights.max(), curve_y.max()) * 1.05)
    c = _Canvas(xlim, ylim, title, xlabel, ylabel)
    c.parts.append('<g class="bars" fill="lightsteelblue" stroke="white">')
    base = float(c.py(0.0))
    for h, a, b in zip(heights, edges[:-1], edges[1:]):
        xa, xb, top = float(c.px(a)), float(c.px(b)), float(c.py(h))
        c.parts.append(
            f'<rect x="{xa:.2f}" y="{top:.2f}" width="{xb - xa:.2f}" height="{base - top:.2f}" '
            f"data-x={quoteattr(fmt(a))} data-y={quoteattr(fmt(h))}/>"
        )
    c.parts.append("</g>")
    c.polyline(curve_x, curve_y, "density", "black")
    return c.render()
