"""Deterministic static SVG plots of tables (no plotting library, so the bytes
depend only on the input data)."""

from __future__ import annotations

import math

from q6.io import Table, atomic_write

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=80, right=20, top=30, bottom=50)

KINDS = {
    "period-vs-epsilon": ("epsilon", "period", True),
    "yamabe-vs-epsilon": ("epsilon", "yamabe", True),
    "orbit-profile": ("t", "v", True),
    "floquet-spectrum": (None, None, False),
}


class EmptyTable(ValueError):
    pass


def _label(x: float) -> str:
    return f"{x:.4g}"


def _points(table: Table, kind: str):
    if kind == "floquet-spectrum":
        pts = []
        for k in range(6):
            re, im = table.column(f"exp_re_{k}"), table.column(f"exp_im_{k}")
            pts.extend(zip(re, im))
        return pts
    xc, yc, _ = KINDS[kind]
    return list(zip(table.column(xc), table.column(yc)))


def render_svg(table: Table, kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {sorted(KINDS)}")
    if len(table) == 0:
        raise EmptyTable(f"cannot plot {kind} from an empty table")
    pts = [(float(x), float(y)) for x, y in _points(table, kind) if math.isfinite(x) and math.isfinite(y)]
    if not pts:
        raise EmptyTable(f"no finite points for {kind}")
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + pw * (x - x0) / (x1 - x0)

    def sy(y):
        return MARGIN["top"] + ph * (1 - (y - y0) / (y1 - y0))

    xl, yl, line = KINDS[kind]
    xl, yl = (xl, yl) if xl else ("Re exponent", "Im exponent")
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2:.2f}" y="18" text-anchor="middle" font-size="14">{kind}</text>',
    ]
    for k in range(5):
        fx = x0 + (x1 - x0) * k / 4
        fy = y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{sx(fx):.2f}" y="{HEIGHT - 30}" text-anchor="middle" font-size="11">{_label(fx)}</text>')
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{sy(fy) + 4:.2f}" text-anchor="end" font-size="11">{_label(fy)}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{xl}</text>')
    out.append(f'<text x="14" y="{MARGIN["top"] + ph / 2:.2f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 14 {MARGIN["top"] + ph / 2:.2f})">{yl}</text>')
    if line and len(pts) > 1:
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="steelblue" stroke-width="1.5"/>')
    for x, y in pts if (not line or len(pts) <= 64) else []:
        out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="crimson"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(table: Table, kind: str, path) -> str:
    svg = render_svg(table, kind)
    atomic_write(path, svg)
    return svg
