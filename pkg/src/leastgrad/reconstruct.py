"""Rebuild the minimal-total-variation solution from a transport plan.

The plan's segments are non-crossing chords of the convex domain, so in
arc-length coordinates their endpoint intervals form a laminar family:
any two are nested or disjoint. The planar subdivision is therefore a
forest — each chord cuts off the region towards its own boundary
interval — and faces, adjacency, point location and areas all come from
that forest without generic arrangement machinery.

Faces touching the boundary take the datum's (length-weighted mean)
trace value; fully enclosed faces take the midpoint of the weighted-
median interval of their neighbours' values, the deterministic and
sign-symmetric choice among the minimizers of the jump energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryBV
from .errors import (
    CrossingSegmentsError,
    InconsistentTraceError,
    OnJumpSetError,
)
from .geometry import ConvexDomain, ConvexPolygon, Disc
from .transport import TransportPlan

SNAP_TOL = 1e-9
ARC_TOL = 1e-9
JUMP_SNAP = 1e-9


@dataclass(frozen=True)
class Chord:
    s_a: float
    s_b: float  # s_a < s_b in [0, L)
    a: tuple[float, float]
    b: tuple[float, float]
    mass: float

    @property
    def length(self) -> float:
        return math.hypot(self.a[0] - self.b[0], self.a[1] - self.b[1])


@dataclass(frozen=True)
class Face:
    index: int
    chord: int | None  # chord whose boundary-interval side this face fills
    child_chords: tuple[int, ...]
    boundary_arcs: tuple[tuple[float, float], ...]  # (s0, s1), may wrap once


class Subdivision:
    """Faces of the domain cut by non-crossing chords."""

    def __init__(self, domain: ConvexDomain, chords, faces, parent, depth):
        self.domain = domain
        self.chords: tuple[Chord, ...] = tuple(chords)
        self.faces: tuple[Face, ...] = tuple(faces)
        self.parent = parent  # chord index -> parent chord index or None
        self.depth = depth  # chord index -> nesting depth (roots = 0)
        # face inside chord k is faces[k]; the root face is faces[-1]
        self._lines = self._chord_lines()

    @property
    def root_face(self) -> Face:
        return self.faces[-1]

    def face_inside(self, chord_index: int) -> Face:
        return self.faces[chord_index]

    def face_outside(self, chord_index: int) -> Face:
        p = self.parent[chord_index]
        return self.faces[p] if p is not None else self.root_face

    def _chord_lines(self):
        """Per chord: (A, direction, inside_sign) for half-plane tests."""
        lines = []
        for c in self.chords:
            dx, dy = c.b[0] - c.a[0], c.b[1] - c.a[1]
            mid = self.domain.boundary_param(0.5 * (c.s_a + c.s_b)).xy
            cr = dx * (mid[1] - c.a[1]) - dy * (mid[0] - c.a[0])
            lines.append((c.a, (dx, dy), 1.0 if cr > 0 else -1.0))
        return lines

    def locate(self, x: float, y: float) -> Face:
        """Face containing the point; the innermost chord whose boundary-
        interval side contains it identifies the face."""
        best_depth, best_chord = -1, None
        for k, (A, D, sgn) in enumerate(self._lines):
            cr = D[0] * (y - A[1]) - D[1] * (x - A[0])
            if cr * sgn > 0 and self.depth[k] > best_depth:
                best_depth, best_chord = self.depth[k], k
        return self.faces[best_chord] if best_chord is not None else self.root_face

    def locate_many(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Vectorized face index per point (flat arrays)."""
        n = len(X)
        if not self.chords:
            return np.full(n, len(self.faces) - 1, dtype=np.int64)
        best_depth = np.full(n, -1, dtype=np.int64)
        best_chord = np.full(n, -1, dtype=np.int64)
        for k, (A, D, sgn) in enumerate(self._lines):
            cr = D[0] * (Y - A[1]) - D[1] * (X - A[0])
            inside = cr * sgn > 0
            deeper = inside & (self.depth[k] > best_depth)
            best_depth[deeper] = self.depth[k]
            best_chord[deeper] = k
        out = best_chord.copy()
        out[out < 0] = len(self.faces) - 1
        return out

    def distance_to_jump_set(self, x: float, y: float) -> float:
        d = math.inf
        for c in self.chords:
            vx, vy = c.b[0] - c.a[0], c.b[1] - c.a[1]
            wx, wy = x - c.a[0], y - c.a[1]
            vv = vx * vx + vy * vy
            t = 0.0 if vv == 0 else max(0.0, min(1.0, (wx * vx + wy * vy) / vv))
            d = min(d, math.hypot(wx - t * vx, wy - t * vy))
        return d

    def face_area(self, face: Face) -> float:
        """Exact area: the straight-edge loop plus circular-segment bulges
        for disc arcs (polygon arcs insert the domain's corner points)."""
        pts = []
        arc_extra = 0.0
        loop = self._loop(face)
        for kind, u, v in loop:
            if kind == "pt":
                pts.append(u)
            else:  # arc from arc coord u to v (ccw, v may exceed L)
                pts.append(self.domain.boundary_param(u).xy)
                if isinstance(self.domain, ConvexPolygon):
                    for sv in self._polygon_corners_between(u, v):
                        pts.append(self.domain.boundary_param(sv).xy)
                elif isinstance(self.domain, Disc):
                    r = self.domain.radius
                    dth = (v - u) / r
                    arc_extra += 0.5 * r * r * (dth - math.sin(dth))
                pts.append(self.domain.boundary_param(v).xy)
        area = 0.0
        for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
            area += 0.5 * (x0 * y1 - x1 * y0)
        return area + arc_extra

    def _polygon_corners_between(self, u: float, v: float):
        L = self.domain.boundary_length
        corners = sorted(self.domain._cum[:-1])
        out = []
        for base in (0.0, L):
            for sc in corners:
                s = sc + base
                if u + ARC_TOL < s < v - ARC_TOL:
                    out.append(s % L)
        return out

    def _loop(self, face: Face):
        """CCW boundary walk: arcs and chord traversals a->b for child
        chords, closed by the owning chord b->a (if any)."""
        items = []
        kids = sorted(face.child_chords, key=lambda k: self.chords[k].s_a)
        L = self.domain.boundary_length
        if face.chord is not None:
            c = self.chords[face.chord]
            lo, hi = c.s_a, c.s_b
            cursor = lo
            for k in kids:
                d = self.chords[k]
                if d.s_a > cursor + ARC_TOL:
                    items.append(("arc", cursor, d.s_a))
                items.append(("pt", d.a, None))
                items.append(("pt", d.b, None))
                cursor = d.s_b
            if hi > cursor + ARC_TOL:
                items.append(("arc", cursor, hi))
            items.append(("pt", c.b, None))
            items.append(("pt", c.a, None))
        else:
            if not kids:
                items.append(("arc", 0.0, L))
                return items
            first = self.chords[kids[0]]
            cursor = first.s_a
            for k in kids:
                d = self.chords[k]
                if d.s_a > cursor + ARC_TOL:
                    items.append(("arc", cursor, d.s_a))
                items.append(("pt", d.a, None))
                items.append(("pt", d.b, None))
                cursor = d.s_b
            wrap_end = first.s_a + L
            if wrap_end > cursor + ARC_TOL:
                items.append(("arc", cursor, wrap_end))
        # normalize arc entries to (kind, u, v); pt entries to (kind, xy, _)
        return items


def _canonical_chords(plan: TransportPlan, domain: ConvexDomain):
    merged = {}
    for pair in plan.pairs:
        if pair.length <= SNAP_TOL:
            continue
        sa = domain.arc_coordinate(pair.source.xy)
        sb = domain.arc_coordinate(pair.target.xy)
        a, b = pair.source.xy, pair.target.xy
        if sa > sb:
            sa, sb, a, b = sb, sa, b, a
        key = (round(sa / SNAP_TOL), round(sb / SNAP_TOL))
        if key in merged:
            c = merged[key]
            merged[key] = Chord(c.s_a, c.s_b, c.a, c.b, c.mass + pair.mass)
        else:
            merged[key] = Chord(sa, sb, a, b, pair.mass)
    return sorted(merged.values(), key=lambda c: (c.s_a, -c.s_b))


def build_arrangement(plan: TransportPlan, domain: ConvexDomain) -> Subdivision:
    """Faces cut out of the domain by the plan's chords.

    Raises CrossingSegments when two chords cross in the interior, which
    signals a corrupted or non-optimal plan.
    """
    chords = _canonical_chords(plan, domain)

    def position(s, c):
        """-1 outside c's interval, 0 on an endpoint, +1 strictly inside."""
        if abs(s - c.s_a) <= SNAP_TOL or abs(s - c.s_b) <= SNAP_TOL:
            return 0
        return 1 if c.s_a < s < c.s_b else -1

    for i in range(len(chords)):
        for j in range(i + 1, len(chords)):
            c1, c2 = chords[i], chords[j]
            # one endpoint strictly inside and the other strictly outside
            # c1's interval means the chords interleave, i.e. cross
            if {position(c2.s_a, c1), position(c2.s_b, c1)} == {1, -1}:
                raise CrossingSegmentsError(
                    f"chords {i} and {j} cross in the interior"
                )

    # laminar containment forest by a sweep over (s_a asc, s_b desc)
    parent = [None] * len(chords)
    depth = [0] * len(chords)
    stack = []
    for k, c in enumerate(chords):
        while stack and chords[stack[-1]].s_b < c.s_b - SNAP_TOL:
            stack.pop()
        if stack:
            parent[k] = stack[-1]
            depth[k] = depth[stack[-1]] + 1
        stack.append(k)

    children = [[] for _ in chords]
    roots = []
    for k, p in enumerate(parent):
        if p is None:
            roots.append(k)
        else:
            children[p].append(k)

    L = domain.boundary_length
    faces = []

    def arcs_for(lo, hi, kids):
        arcs = []
        cursor = lo
        for k in sorted(kids, key=lambda k: chords[k].s_a):
            d = chords[k]
            if d.s_a > cursor + ARC_TOL:
                arcs.append((cursor, d.s_a))
            cursor = max(cursor, d.s_b)
        if hi > cursor + ARC_TOL:
            arcs.append((cursor, hi))
        return tuple(arcs)

    for k, c in enumerate(chords):
        faces.append(
            Face(
                index=k,
                chord=k,
                child_chords=tuple(sorted(children[k], key=lambda q: chords[q].s_a)),
                boundary_arcs=arcs_for(c.s_a, c.s_b, children[k]),
            )
        )
    if roots:
        first = chords[min(roots, key=lambda k: chords[k].s_a)]
        arcs = arcs_for(
            first.s_a,
            first.s_a + L,
            roots,
        )
    else:
        arcs = ((0.0, L),)
    faces.append(
        Face(
            index=len(chords),
            chord=None,
            child_chords=tuple(sorted(roots, key=lambda q: chords[q].s_a)),
            boundary_arcs=arcs,
        )
    )
    return Subdivision(domain, chords, faces, parent, depth)


@dataclass(frozen=True)
class FaceValue:
    value: float
    enclosed: bool
    feasible: tuple[float, float] | None  # [lo, hi] for enclosed faces


class PlanarSolution:
    """The reconstructed solution: one value per face of the subdivision."""

    def __init__(self, subdivision: Subdivision, face_values):
        self.subdivision = subdivision
        self.face_values: tuple[FaceValue, ...] = tuple(face_values)

    @property
    def domain(self) -> ConvexDomain:
        return self.subdivision.domain

    def value_of(self, face: Face) -> float:
        return self.face_values[face.index].value

    def evaluate(self, x: float, y: float) -> float:
        """Value of the containing face; points within 1e-9 of a chord are
        on the jump set and have no canonical value."""
        if self.subdivision.distance_to_jump_set(x, y) <= JUMP_SNAP:
            raise OnJumpSetError(f"point ({x}, {y}) lies on the jump set")
        return self.value_of(self.subdivision.locate(x, y))

    def evaluate_many(self, X, Y) -> np.ndarray:
        """Vectorized evaluation without the jump-set guard (grid use)."""
        X = np.asarray(X, dtype=float).ravel()
        Y = np.asarray(Y, dtype=float).ravel()
        idx = self.subdivision.locate_many(X, Y)
        vals = np.array([fv.value for fv in self.face_values])
        return vals[idx]

    def jump_edges(self):
        """(chord, |value jump|) per chord of the subdivision."""
        sub = self.subdivision
        out = []
        for k, c in enumerate(sub.chords):
            va = self.value_of(sub.face_inside(k))
            vb = self.value_of(sub.face_outside(k))
            out.append((c, abs(va - vb)))
        return out

    def total_variation(self) -> float:
        """Sum over interior chords of |value jump| times chord length."""
        return sum(j * c.length for c, j in self.jump_edges())

    def to_json(self) -> dict:
        sub = self.subdivision
        faces = []
        for f, fv in zip(sub.faces, self.face_values):
            faces.append(
                {
                    "chord": f.chord,
                    "value": fv.value,
                    "enclosed": fv.enclosed,
                    "feasible": list(fv.feasible) if fv.feasible else None,
                    "boundary_arcs": [list(a) for a in f.boundary_arcs],
                }
            )
        chords = [
            {"a": list(c.a), "b": list(c.b), "mass": c.mass}
            for c in sub.chords
        ]
        return {"chords": chords, "faces": faces}


def _arc_mean(g: BoundaryBV, s0: float, s1: float) -> float:
    """Mean of g over the ccw arc [s0, s1]; s1 may exceed the perimeter."""
    L = g.domain.boundary_length
    if s1 - s0 <= ARC_TOL:
        return g.value(s0 % L)
    a = s0 % L
    b = a + (s1 - s0)
    if b <= L + ARC_TOL:
        return g.mean(a, min(b, L))
    # wraps through arc coordinate 0: weight the two sub-arcs by length
    w1 = L - a
    w2 = b - L
    total = 0.0
    if w1 > ARC_TOL:
        total += g.mean(a, L) * w1
    if w2 > ARC_TOL:
        total += g.mean(0.0, w2) * w2
    return total / (w1 + w2)


def _weighted_median_interval(values, weights) -> tuple[float, float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    v = [values[i] for i in order]
    w = [weights[i] for i in order]
    W = sum(w)
    half = 0.5 * W
    cum = 0.0
    rel = 1e-12 * max(W, 1.0)
    for i in range(len(v)):
        cum += w[i]
        if cum > half + rel:
            return (v[i], v[i])
        if abs(cum - half) <= rel:
            return (v[i], v[i + 1]) if i + 1 < len(v) else (v[i], v[i])
    return (v[-1], v[-1])


def assign_face_values(
    subdivision: Subdivision,
    g: BoundaryBV,
    plan: TransportPlan | None = None,
    trace_tol: float | None = None,
) -> PlanarSolution:
    """Give every face its trace value; enclosed faces get the midpoint of
    the weighted-median interval of their neighbours' values.

    ``trace_tol`` bounds the allowed disagreement between arcs of one face
    (default: twice the largest diffuse pair mass of the plan, or 1e-9 for
    purely atomic data)."""
    sub = subdivision
    if trace_tol is None:
        diffuse = [
            p.mass
            for p in (plan.pairs if plan else ())
            if "diffuse" in (p.source_tag, p.target_tag)
        ]
        trace_tol = 2.0 * max(diffuse) if diffuse else 1e-9

    n = len(sub.faces)
    values: list[float | None] = [None] * n
    feasible: list[tuple[float, float] | None] = [None] * n

    for f in sub.faces:
        if not f.boundary_arcs:
            continue
        means, lens = [], []
        for s0, s1 in f.boundary_arcs:
            means.append(_arc_mean(g, s0, s1))
            lens.append(s1 - s0)
        if max(means) - min(means) > trace_tol + 1e-12:
            raise InconsistentTraceError(
                f"face {f.index} touches arcs with trace values in "
                f"[{min(means)}, {max(means)}], beyond tolerance {trace_tol}"
            )
        values[f.index] = float(np.average(means, weights=lens))

    # neighbours across each chord
    nbrs = [[] for _ in range(n)]
    for k, c in enumerate(sub.chords):
        fi = sub.face_inside(k).index
        fo = sub.face_outside(k).index
        nbrs[fi].append((fo, c.length))
        nbrs[fo].append((fi, c.length))

    pending = [f.index for f in sub.faces if values[f.index] is None]
    while pending:
        progressed = False
        rest = []
        for fi in pending:
            known = [(values[j], w) for j, w in nbrs[fi] if values[j] is not None]
            if len(known) < len(nbrs[fi]):
                rest.append(fi)
                continue
            vs = [v for v, _ in known]
            ws = [w for _, w in known]
            lo, hi = _weighted_median_interval(vs, ws)
            values[fi] = 0.5 * (lo + hi)
            feasible[fi] = (lo, hi)
            progressed = True
        if not progressed and rest:
            # nested enclosed faces: fill those with most known neighbours
            fi = max(
                rest,
                key=lambda q: sum(1 for j, _ in nbrs[q] if values[j] is not None),
            )
            known = [(values[j], w) for j, w in nbrs[fi] if values[j] is not None]
            if not known:
                values[fi] = 0.0
                feasible[fi] = (0.0, 0.0)
            else:
                vs = [v for v, _ in known]
                ws = [w for _, w in known]
                lo, hi = _weighted_median_interval(vs, ws)
                values[fi] = 0.5 * (lo + hi)
                feasible[fi] = (lo, hi)
            rest.remove(fi)
        pending = rest

    face_values = [
        FaceValue(
            value=values[i],
            enclosed=not sub.faces[i].boundary_arcs,
            feasible=feasible[i],
        )
        for i in range(n)
    ]
    return PlanarSolution(sub, face_values)


def evaluate_u(sol: PlanarSolution, p) -> float:
    return sol.evaluate(p[0], p[1])


def total_variation_solution(sol: PlanarSolution) -> float:
    return sol.total_variation()
