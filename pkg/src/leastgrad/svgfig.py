"""Deterministic SVG rendering of solutions and the disc reference figures.

All geometry is emitted as polylines/polygons with fixed sampling, so the
same input always produces byte-identical output.
"""

from __future__ import annotations

import math

from .geometry import ConvexPolygon, Disc
from .reconstruct import PlanarSolution, Subdivision

_ARC_SAMPLES_PER_UNIT = 64
_SQ2H = math.sqrt(2.0) / 2.0


def _fmt(x: float) -> str:
    return f"{x:.4f}"


class _Canvas:
    """Fixed-size SVG canvas mapping world coordinates (y up) to pixels."""

    def __init__(self, xmin, ymin, xmax, ymax, size=640, pad=20):
        self.size = size
        self.pad = pad
        self.scale = (size - 2 * pad) / max(xmax - xmin, ymax - ymin)
        self.xmin, self.ymax = xmin, ymax
        self.parts = []

    def pt(self, x: float, y: float) -> str:
        px = self.pad + (x - self.xmin) * self.scale
        py = self.pad + (self.ymax - y) * self.scale
        return f"{_fmt(px)},{_fmt(py)}"

    def polygon(self, pts, fill="none", stroke="none", width=1.0, opacity=1.0):
        d = " ".join(self.pt(x, y) for x, y in pts)
        self.parts.append(
            f'<polygon points="{d}" fill="{fill}" stroke="{stroke}" '
            f'stroke-width="{_fmt(width)}" fill-opacity="{_fmt(opacity)}"/>'
        )

    def polyline(self, pts, stroke="#000000", width=1.0):
        d = " ".join(self.pt(x, y) for x, y in pts)
        self.parts.append(
            f'<polyline points="{d}" fill="none" stroke="{stroke}" '
            f'stroke-width="{_fmt(width)}"/>'
        )

    def line(self, a, b, stroke="#000000", width=1.0):
        self.polyline([a, b], stroke, width)

    def text(self, x, y, s, size=16, anchor="middle", fill="#000000"):
        self.parts.append(
            f'<text x="{self.pt(x, y).split(",")[0]}" '
            f'y="{self.pt(x, y).split(",")[1]}" font-size="{size}" '
            f'text-anchor="{anchor}" fill="{fill}" '
            f'font-family="sans-serif">{s}</text>'
        )

    def render(self) -> str:
        body = "\n".join(self.parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" '
            f'height="{self.size}" viewBox="0 0 {self.size} {self.size}">\n'
            f'<rect width="100%" height="100%" fill="#ffffff"/>\n'
            f"{body}\n</svg>\n"
        )


def _value_color(v: float, vmin: float, vmax: float) -> str:
    """Blue-white-red diverging map over [vmin, vmax]."""
    if vmax - vmin <= 0:
        t = 0.5
    else:
        t = (v - vmin) / (vmax - vmin)
    lo, mid, hi = (33, 102, 172), (247, 247, 247), (178, 24, 43)
    if t < 0.5:
        a, b, u = lo, mid, 2 * t
    else:
        a, b, u = mid, hi, 2 * t - 1
    rgb = tuple(int(round(ca + (cb - ca) * u)) for ca, cb in zip(a, b))
    return "#%02x%02x%02x" % rgb


def _face_outline(sub: Subdivision, face) -> list[tuple[float, float]]:
    """Closed polyline of a face: chords exact, arcs finely sampled."""
    pts = []
    L = sub.domain.boundary_length
    for kind, u, v in sub._loop(face):
        if kind == "pt":
            pts.append(u)
            continue
        if isinstance(sub.domain, ConvexPolygon):
            pts.append(sub.domain.boundary_param(u).xy)
            for sc in sub._polygon_corners_between(u, v):
                pts.append(sub.domain.boundary_param(sc).xy)
            pts.append(sub.domain.boundary_param(v).xy)
        else:
            n = max(2, int((v - u) * _ARC_SAMPLES_PER_UNIT))
            for k in range(n + 1):
                s = u + (v - u) * k / n
                pts.append(sub.domain.boundary_param(s % L).xy)
    return pts


def render_solution(sol: PlanarSolution, size: int = 640) -> str:
    """Faces colored by value; chords drawn with width by jump mass."""
    sub = sol.subdivision
    import numpy as np

    bb = sub.domain.boundary_samples(256)
    cv = _Canvas(bb[:, 0].min(), bb[:, 1].min(), bb[:, 0].max(), bb[:, 1].max(), size)

    vals = [fv.value for fv in sol.face_values]
    vmin, vmax = min(vals), max(vals)
    # draw outer faces first so nested faces paint over them
    order = sorted(
        range(len(sub.faces)),
        key=lambda i: -1 if sub.faces[i].chord is None else sub.depth[sub.faces[i].chord],
    )
    for i in order:
        cv.polygon(
            _face_outline(sub, sub.faces[i]),
            fill=_value_color(vals[i], vmin, vmax),
            stroke="none",
        )
    jumps = sol.jump_edges()
    jmax = max((j for _, j in jumps), default=1.0) or 1.0
    for c, j in jumps:
        cv.line(c.a, c.b, stroke="#222222", width=0.8 + 3.2 * j / jmax)
    cv.polyline(
        [tuple(p) for p in bb] + [tuple(bb[0])], stroke="#000000", width=1.5
    )
    return cv.render()


def render_plan(plan, domain, size: int = 640) -> str:
    """Transport segments over the domain outline, width by mass."""
    bb = domain.boundary_samples(256)
    cv = _Canvas(bb[:, 0].min(), bb[:, 1].min(), bb[:, 0].max(), bb[:, 1].max(), size)
    cv.polyline([tuple(p) for p in bb] + [tuple(bb[0])], stroke="#000000", width=1.5)
    mmax = max((p.mass for p in plan.pairs), default=1.0) or 1.0
    for p in plan.pairs:
        cv.line(
            p.source.xy, p.target.xy, stroke="#2166ac", width=0.4 + 2.6 * p.mass / mmax
        )
    return cv.render()


# --------------------------------------------------------------------------
# disc reference figures
# --------------------------------------------------------------------------


def _disc_canvas(size: int) -> _Canvas:
    cv = _Canvas(-1.05, -1.05, 1.05, 1.05, size)
    circle = [
        (math.cos(2 * math.pi * k / 256), math.sin(2 * math.pi * k / 256))
        for k in range(257)
    ]
    cv.polyline(circle, stroke="#000000", width=1.5)
    return cv


def _rot(pts, quarter_turns: int):
    out = []
    for x, y in pts:
        for _ in range(quarter_turns):
            x, y = -y, x
        out.append((x, y))
    return out


def render_pinwheel_potential(size: int = 640, n_levels: int = 14) -> str:
    """Level lines of the cone potential whose minimum is 0 on the inner
    square: four straight segments per level, one per quadrant sector."""
    cv = _disc_canvas(size)
    for k in range(1, n_levels + 1):
        a = _SQ2H * (1.0 - 2.0 * k / (n_levels + 1))
        # right sector: horizontal segment y = a, |a| < x < sqrt(1-a^2)
        seg = [(abs(a), a), (math.sqrt(max(1.0 - a * a, 0.0)), a)]
        for q in range(4):
            cv.polyline(_rot(seg, q), stroke="#2166ac", width=1.0)
    # the inner square where the potential is minimal
    sq = [(_SQ2H, _SQ2H), (-_SQ2H, _SQ2H), (-_SQ2H, -_SQ2H), (_SQ2H, -_SQ2H),
          (_SQ2H, _SQ2H)]
    cv.polyline(sq, stroke="#b2182b", width=2.0)
    return cv.render()


def render_arc_potential(size: int = 640, n_levels: int = 10) -> str:
    """Level lines of the distance potential to the four diagonal boundary
    points: circular arcs around each of them, clipped to the disc and to
    the nearest-center region."""
    cv = _disc_canvas(size)
    centers = [(_SQ2H, _SQ2H), (-_SQ2H, _SQ2H), (-_SQ2H, -_SQ2H), (_SQ2H, -_SQ2H)]
    for k in range(1, n_levels + 1):
        r = 2.0 * k / (n_levels + 1)
        for cx, cy in centers:
            pts = []
            for j in range(257):
                th = 2 * math.pi * j / 256
                x, y = cx + r * math.cos(th), cy + r * math.sin(th)
                d_here = r
                d_other = min(
                    math.hypot(x - ox, y - oy) for ox, oy in centers
                )
                if x * x + y * y <= 1.0 and d_other >= d_here - 1e-12:
                    pts.append((x, y))
                else:
                    if len(pts) > 1:
                        cv.polyline(pts, stroke="#2166ac", width=1.0)
                    pts = []
            if len(pts) > 1:
                cv.polyline(pts, stroke="#2166ac", width=1.0)
    for cx, cy in centers:
        cv.polygon(
            [(cx - 0.015, cy - 0.015), (cx + 0.015, cy - 0.015),
             (cx + 0.015, cy + 0.015), (cx - 0.015, cy + 0.015)],
            fill="#b2182b",
        )
    return cv.render()


def render_family_regions(size: int = 640) -> str:
    """Region picture of the one-parameter minimizer family: two side
    lenses with values 2x^2, top and bottom lenses with -2y^2, and the
    central square taking the free value."""
    cv = _disc_canvas(size)

    def lens(quarter_turns: int, color: str):
        # right lens: x > sqrt(2)/2 between the chord and the circle
        pts = [(_SQ2H, -_SQ2H)]
        for j in range(65):
            th = -math.pi / 4 + math.pi / 2 * j / 64
            pts.append((math.cos(th), math.sin(th)))
        pts.append((_SQ2H, _SQ2H))
        cv.polygon(_rot(pts, quarter_turns), fill=color, opacity=0.55)

    lens(0, "#b2182b")
    lens(2, "#b2182b")
    lens(1, "#2166ac")
    lens(3, "#2166ac")
    sq = [(_SQ2H, _SQ2H), (-_SQ2H, _SQ2H), (-_SQ2H, -_SQ2H), (_SQ2H, -_SQ2H)]
    cv.polygon(sq, fill="#f7f7f7", stroke="#222222", width=1.2)
    cv.text(0.86, 0.0, "2x&#178;", size=18)
    cv.text(-0.86, 0.0, "2x&#178;", size=18)
    cv.text(0.0, 0.84, "&#8722;2y&#178;", size=18)
    cv.text(0.0, -0.88, "&#8722;2y&#178;", size=18)
    cv.text(0.0, -0.02, "&#955;", size=22)
    return cv.render()
