"""Standalone SVG rendering of DD-plots."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .ddplot import DDPlot

SIZE = 400
MARGIN = 50


def _x(v: float) -> float:
    return MARGIN + v * SIZE


def _y(v: float) -> float:
    return MARGIN + (1.0 - v) * SIZE


def ddplot_svg(dd: DDPlot, name_f: str = "F", name_g: str = "G", title: str = "") -> str:
    """Scatter of ``(D_G, D_F)`` with the (0,0)-(1,1) reference line.

    Curves from F are drawn as filled circles, curves from G as hollow
    ones.  Every marker carries ``data-df``/``data-dg`` attributes with
    the depths rounded to 1e-6.
    """
    total = SIZE + 2 * MARGIN
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" '
        f'viewBox="0 0 {total} {total}">',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>',
        f'<line class="diagonal" x1="{_x(0)}" y1="{_y(0)}" x2="{_x(1)}" y2="{_y(1)}" '
        'stroke="grey" stroke-dasharray="4 3"/>',
    ]
    for tick in (0.0, 0.5, 1.0):
        out.append(f'<text x="{_x(tick)}" y="{_y(0) + 18}" font-size="11" text-anchor="middle">{tick:g}</text>')
        out.append(f'<text x="{_x(0) - 8}" y="{_y(tick) + 4}" font-size="11" text-anchor="end">{tick:g}</text>')
    out.append(
        f'<text x="{_x(0.5)}" y="{total - 10}" font-size="13" text-anchor="middle">'
        f"depth in {escape(name_g)} ({dd.method})</text>"
    )
    out.append(
        f'<text x="14" y="{_y(0.5)}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 14 {_y(0.5)})">depth in {escape(name_f)} ({dd.method})</text>'
    )
    if title:
        out.append(f'<text x="{_x(0.5)}" y="24" font-size="14" text-anchor="middle">{escape(title)}</text>')
    for i, (df, dg) in enumerate(dd.points):
        group = "f" if i < dd.n else "g"
        fill = "steelblue" if group == "f" else "none"
        out.append(
            f'<circle class="marker {group}" cx="{_x(dg):.3f}" cy="{_y(df):.3f}" r="3.5" '
            f'fill="{fill}" stroke="darkred" data-df="{df:.6f}" data-dg="{dg:.6f}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
