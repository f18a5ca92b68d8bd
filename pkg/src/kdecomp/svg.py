"""Standalone SVG charts of density curves.

The output depends only on the input numbers: fixed canvas, fixed palette
and fixed number formatting, so identical curves give identical bytes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .errors import SchemaError

COMPOSITE = "(composite)"
WIDTH, HEIGHT = 720, 420
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 150, 20, 50
PALETTE = (
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
    "#937860", "#da8bc3", "#8c8c8c", "#ccb974", "#64b5cd",
)


@dataclass
class Curves:
    """Grid, composite curve and (weighted) component curves."""

    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    composite: np.ndarray | None = None
    components: dict[str, np.ndarray] = field(default_factory=dict)


def parse_curves(text: str) -> Curves:
    """Read a curve CSV from ``density`` (x,pdf,cdf) or ``decompose`` (component,x,pdf).

    Raises:
        SchemaError: unknown header, unparsable numbers or mismatched grids.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header:
        raise SchemaError("curve file is empty (no header)")
    header = [h.strip().lower() for h in header]
    rows = [r for r in reader if r]
    if header[:2] != ["x", "pdf"] and header[:3] != ["component", "x", "pdf"]:
        raise SchemaError(f"unrecognised curve header {header}")
    try:
        if header[0] == "x":
            data = np.array([[float(r[0]), float(r[1])] for r in rows]).reshape(-1, 2)
            return Curves(data[:, 0], data[:, 1] if len(data) else None)
        series: dict[str, list[tuple[float, float]]] = {}
        for r in rows:
            series.setdefault(r[0], []).append((float(r[1]), float(r[2])))
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"malformed curve row: {exc}") from None

    curves = Curves()
    for name, pts in series.items():
        arr = np.array(pts)
        if curves.x.size == 0:
            curves.x = arr[:, 0]
        elif arr.shape[0] != curves.x.size or not np.array_equal(arr[:, 0], curves.x):
            raise SchemaError(f"component {name!r} is not on the same grid as the others")
        if name == COMPOSITE:
            curves.composite = arr[:, 1]
        else:
            curves.components[name] = arr[:, 1]
    return curves


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _fmt(v):
    return f"{v:.3g}"


def render_svg(curves: Curves, title: str = "") -> str:
    """SVG 1.1 document: stacked component areas plus the composite line."""
    x = np.asarray(curves.x, dtype=float)
    stack = np.cumsum(np.array(list(curves.components.values())), axis=0) if curves.components else None
    ys = [a for a in (curves.composite, None if stack is None else stack[-1]) if a is not None and a.size]
    xlo, xhi = (float(x.min()), float(x.max())) if x.size else (0.0, 1.0)
    if xhi <= xlo:
        xhi = xlo + 1.0
    yhi = max((float(np.max(a)) for a in ys), default=1.0) or 1.0
    yhi *= 1.05

    pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(v):
        return MARGIN_LEFT + (v - xlo) / (xhi - xlo) * pw

    def py(v):
        return MARGIN_TOP + ph - v / yhi * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">',
        f'<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')

    if stack is not None and x.size:
        below = np.zeros_like(x)
        for i, (name, top) in enumerate(zip(curves.components, stack)):
            upper = " L".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, top))
            lower = " L".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[::-1], below[::-1]))
            colour = PALETTE[i % len(PALETTE)]
            out.append(
                f'<path class="area" data-component={quoteattr(name)} d="M{upper} L{lower} Z" '
                f'fill="{colour}" fill-opacity="0.8" stroke="none"/>'
            )
            below = top
    if curves.composite is not None and x.size:
        line = " L".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, curves.composite))
        out.append(f'<path class="composite" d="M{line}" fill="none" stroke="#000000" stroke-width="1.5"/>')

    x0, y0 = MARGIN_LEFT, MARGIN_TOP + ph
    out.append('<g class="axes" stroke="#000000" stroke-width="1">')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + pw}" y2="{y0}"/>')
    out.append(f'<line x1="{x0}" y1="{MARGIN_TOP}" x2="{x0}" y2="{y0}"/>')
    for t in _ticks(xlo, xhi):
        out.append(f'<line x1="{px(t):.2f}" y1="{y0}" x2="{px(t):.2f}" y2="{y0 + 5}"/>')
    for t in _ticks(0.0, yhi):
        out.append(f'<line x1="{x0 - 5}" y1="{py(t):.2f}" x2="{x0}" y2="{py(t):.2f}"/>')
    out.append("</g>")
    out.append('<g class="labels" fill="#000000">')
    for t in _ticks(xlo, xhi):
        out.append(f'<text x="{px(t):.2f}" y="{y0 + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(0.0, yhi):
        out.append(f'<text x="{x0 - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(f'<text x="{x0 + pw / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle">x</text>')
    out.append(
        f'<text x="15" y="{MARGIN_TOP + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 15 {MARGIN_TOP + ph / 2:.2f})">density</text>'
    )
    out.append("</g>")

    if curves.components:
        out.append('<g class="legend">')
        lx = WIDTH - MARGIN_RIGHT + 15
        for i, name in enumerate(curves.components):
            ly = MARGIN_TOP + 10 + 18 * i
            out.append(f'<rect x="{lx}" y="{ly - 9}" width="12" height="12" fill="{PALETTE[i % len(PALETTE)]}"/>')
            out.append(f'<text x="{lx + 18}" y="{ly + 1}">{escape(name)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
