"""Minimal self-contained SVG renderers for the experiment outputs.

No plotting dependency: the harness needs exactly three chart shapes
(paired-error scatter with a diagonal, error-vs-distance scatter with
power-law fits, and mean/std descent curves), each emitted as a small
standalone SVG string. Rendering is deterministic for fixed inputs.
"""

from __future__ import annotations

import math

import numpy as np
from xml.sax.saxutils import escape

SCATTER_SIZE = (640, 640)
CURVES_SIZE = (960, 540)

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"]

_BELOW = "#1f77b4"   # kernel model wins (below the diagonal)
_ABOVE = "#d62728"
_RAY = "#2ca02c"

_MARGIN = 64.0
_FLOOR = 1e-17       # log-plot clip for exact zeros


def _f(v: float) -> str:
    return format(float(v), ".2f")


def _decades(values):
    vals = np.asarray(values, dtype=np.float64)
    pos = vals[vals > 0]
    lo = math.floor(math.log10(max(pos.min(), _FLOOR))) if pos.size else -1
    hi = math.ceil(math.log10(pos.max())) if pos.size else 1
    if hi <= lo:
        hi = lo + 1
    return lo, hi


class _Canvas:
    def __init__(self, width, height, title):
        self.w = width
        self.h = height
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
            f'<clipPath id="plot"><rect x="{_f(_MARGIN)}" y="{_f(_MARGIN)}" '
            f'width="{_f(width - 2 * _MARGIN)}" height="{_f(height - 2 * _MARGIN)}"/></clipPath>',
            f'<text x="{_f(width / 2)}" y="28" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{escape(title)}</text>',
        ]

    def frame(self):
        self.parts.append(
            f'<rect x="{_f(_MARGIN)}" y="{_f(_MARGIN)}" width="{_f(self.w - 2 * _MARGIN)}" '
            f'height="{_f(self.h - 2 * _MARGIN)}" fill="none" stroke="#333" stroke-width="1"/>')

    def text(self, x, y, s, size=12, anchor="middle", color="#333"):
        self.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}" fill="{color}" '
            f'font-family="sans-serif" font-size="{size}">{escape(s)}</text>')

    def line(self, x1, y1, x2, y2, color, width=1.0, dash=None, clip=False):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        extra += ' clip-path="url(#plot)"' if clip else ""
        self.parts.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{color}" stroke-width="{width}"{extra}/>')

    def circle(self, x, y, r, color, opacity=0.6):
        self.parts.append(
            f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{r}" fill="{color}" '
            f'fill-opacity="{opacity}"/>')

    def polyline(self, pts, color, width=1.8):
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{width}" clip-path="url(#plot)"/>')

    def polygon(self, pts, color, opacity=0.18):
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)
        self.parts.append(
            f'<polygon points="{coords}" fill="{color}" fill-opacity="{opacity}" '
            f'stroke="none" clip-path="url(#plot)"/>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _log_mapper(lo_dec, hi_dec, size, margin):
    span = hi_dec - lo_dec

    def to_px(v):
        v = max(float(v), _FLOOR)
        frac = (math.log10(v) - lo_dec) / span
        return margin + frac * (size - 2 * margin)

    return to_px


def _log_ticks(canvas, lo, hi, xlabel, ylabel):
    to_px = _log_mapper(lo, hi, canvas.w, _MARGIN)
    step = max(1, (hi - lo) // 8)
    for dec in range(lo, hi + 1, step):
        px = to_px(10.0 ** dec)
        canvas.line(px, canvas.h - _MARGIN, px, canvas.h - _MARGIN + 5, "#333")
        canvas.text(px, canvas.h - _MARGIN + 20, f"1e{dec}", size=10)
        py = canvas.h - _MARGIN - (px - _MARGIN)
        canvas.line(_MARGIN - 5, py, _MARGIN, py, "#333")
        canvas.text(_MARGIN - 8, py + 4, f"1e{dec}", size=10, anchor="end")
    canvas.text(canvas.w / 2, canvas.h - 18, xlabel, size=13)
    canvas.parts.append(
        f'<text x="20" y="{_f(canvas.h / 2)}" text-anchor="middle" fill="#333" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 20 {_f(canvas.h / 2)})">{escape(ylabel)}</text>')


def render_scatter_compare(comp_errs, kernel_errs, *, measure: str, title: str,
                           win_fraction: float, mean_angle: float,
                           labels=("competitor error", "kernel error")) -> str:
    """Square paired-error scatter: competitor on x, kernel model on y.

    Points below the diagonal are kernel wins; the green ray marks the
    mean polar angle of the cloud (straight in log-log coordinates).
    """
    comp = np.asarray(comp_errs, dtype=np.float64)
    kern = np.asarray(kernel_errs, dtype=np.float64)
    w, h = SCATTER_SIZE
    canvas = _Canvas(w, h, title)
    lo, hi = _decades(np.concatenate([comp, kern]))
    to_px = _log_mapper(lo, hi, w, _MARGIN)
    _log_ticks(canvas, lo, hi, labels[0], labels[1])
    # diagonal y = x
    canvas.line(_MARGIN, h - _MARGIN, w - _MARGIN, _MARGIN, "#888", dash="4,3")
    for x, y in zip(comp, kern):
        color = _BELOW if y < x else _ABOVE
        canvas.circle(to_px(x), h - to_px(y), 1.6, color)
    # mean-angle ray: log y = log x + log tan(angle)
    off = math.log10(max(math.tan(mean_angle), _FLOOR)) if mean_angle < 0.5 * math.pi else None
    if off is not None:
        x1, x2 = lo, hi
        px = [to_px(10.0 ** x1), to_px(10.0 ** x2)]
        py = [h - to_px(10.0 ** (x1 + off)), h - to_px(10.0 ** (x2 + off))]
        canvas.line(px[0], py[0], px[1], py[1], _RAY, width=1.6, clip=True)
    canvas.frame()
    canvas.text(w / 2, h - 40,
                f"{measure}: kernel better on {100.0 * win_fraction:.1f}% of samples, "
                f"mean angle {mean_angle:.3f} rad", size=12)
    return canvas.render()


def render_scatter_fit(d, kernel_errs, comp_errs, *, exponent: int,
                       c_kernel: float, c_comp: float, measure: str,
                       title: str, comp_label: str) -> str:
    """Error against displacement norm, with c*x^k fits for both clouds."""
    d = np.asarray(d, dtype=np.float64)
    kern = np.asarray(kernel_errs, dtype=np.float64)
    comp = np.asarray(comp_errs, dtype=np.float64)
    w, h = SCATTER_SIZE
    canvas = _Canvas(w, h, title)
    xlo, xhi = _decades(d)
    ylo, yhi = _decades(np.concatenate([kern, comp]))
    xmap = _log_mapper(xlo, xhi, w, _MARGIN)
    ymap = _log_mapper(ylo, yhi, h, _MARGIN)
    step = max(1, (yhi - ylo) // 8)
    for dec in range(ylo, yhi + 1, step):
        py = h - ymap(10.0 ** dec)
        canvas.line(_MARGIN - 5, py, _MARGIN, py, "#333")
        canvas.text(_MARGIN - 8, py + 4, f"1e{dec}", size=10, anchor="end")
    for dec in range(xlo, xhi + 1):
        px = xmap(10.0 ** dec)
        canvas.line(px, h - _MARGIN, px, h - _MARGIN + 5, "#333")
        canvas.text(px, h - _MARGIN + 20, f"1e{dec}", size=10)
    canvas.text(w / 2, h - 18, "displacement norm", size=13)
    for x, y in zip(d, comp):
        canvas.circle(xmap(x), h - ymap(y), 1.6, _ABOVE, opacity=0.45)
    for x, y in zip(d, kern):
        canvas.circle(xmap(x), h - ymap(y), 1.6, _BELOW, opacity=0.45)
    for c, color in ((c_comp, _ABOVE), (c_kernel, _BELOW)):
        if c > 0:
            pts = []
            for frac in np.linspace(0.0, 1.0, 40):
                x = 10.0 ** (xlo + frac * (xhi - xlo))
                pts.append((xmap(x), h - ymap(c * x ** exponent)))
            canvas.polyline(pts, color, width=1.6)
    canvas.frame()
    canvas.text(w / 2, h - 40,
                f"{measure}: fits c*x^{exponent}, kernel c={c_kernel:.3g} (blue), "
                f"{comp_label} c={c_comp:.3g} (red)", size=12)
    return canvas.render()


def render_descent_curves(curves, *, title: str, ylabel: str) -> str:
    """Mean curves with +-1 std bands per (algorithm, alpha)."""
    w, h = CURVES_SIZE
    canvas = _Canvas(w, h, title)
    t_max = max(c.mean.shape[0] for c in curves) - 1
    y_lo = min(float((c.mean - c.std).min()) for c in curves)
    y_hi = max(float((c.mean + c.std).max()) for c in curves)
    pad = 0.05 * (y_hi - y_lo or 1.0)
    y_lo -= pad
    y_hi += pad

    def xmap(t):
        return _MARGIN + (t / t_max) * (w - 2 * _MARGIN)

    def ymap(v):
        return h - _MARGIN - ((v - y_lo) / (y_hi - y_lo)) * (h - 2 * _MARGIN)

    for t in range(0, t_max + 1, max(1, t_max // 10)):
        canvas.line(xmap(t), h - _MARGIN, xmap(t), h - _MARGIN + 5, "#333")
        canvas.text(xmap(t), h - _MARGIN + 20, str(t), size=10)
    for frac in np.linspace(0.0, 1.0, 6):
        v = y_lo + frac * (y_hi - y_lo)
        canvas.line(_MARGIN - 5, ymap(v), _MARGIN, ymap(v), "#333")
        canvas.text(_MARGIN - 8, ymap(v) + 4, f"{v:.2f}", size=10, anchor="end")
    canvas.text(w / 2, h - 18, "iteration", size=13)
    canvas.parts.append(
        f'<text x="20" y="{_f(h / 2)}" text-anchor="middle" fill="#333" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 20 {_f(h / 2)})">{escape(ylabel)}</text>')
    for i, c in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        ts = np.arange(c.mean.shape[0])
        upper = [(xmap(t), ymap(v)) for t, v in zip(ts, c.mean + c.std)]
        lower = [(xmap(t), ymap(v)) for t, v in zip(ts[::-1], (c.mean - c.std)[::-1])]
        canvas.polygon(upper + lower, color)
        canvas.polyline([(xmap(t), ymap(v)) for t, v in zip(ts, c.mean)], color)
        label = c.algorithm if c.alpha is None else f"{c.algorithm} alpha={c.alpha:g}"
        ly = _MARGIN + 18 + 18 * i
        canvas.line(w - _MARGIN - 150, ly - 4, w - _MARGIN - 120, ly - 4, color, width=3)
        canvas.text(w - _MARGIN - 112, ly, label, size=12, anchor="start")
    canvas.frame()
    return canvas.render()
