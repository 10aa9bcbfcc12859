"""Convex planar domains: discs and convex polygons with an arc-length
boundary coordinate, projection onto the closed set, diameters and
Hausdorff boundary distance.

All values are immutable after construction and every operation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InteriorPointError

ON_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the boundary curve with its arc-length coordinate.

    ``tangent`` points in the counterclockwise direction; ``inner_normal``
    is the tangent rotated by +90 degrees.
    """

    s: float
    xy: tuple[float, float]
    tangent: tuple[float, float]
    inner_normal: tuple[float, float]


def _rot90(v):
    return (-v[1], v[0])


class ConvexDomain:
    """Common interface of :class:`Disc` and :class:`ConvexPolygon`."""

    kind: str
    strictly_convex: bool

    @property
    def boundary_length(self) -> float:
        raise NotImplementedError

    def boundary_param(self, s: float) -> BoundaryPoint:
        """Point at arc length ``s`` (mod perimeter) counterclockwise from
        the reference point (disc: angle 0; polygon: vertex 0)."""
        raise NotImplementedError

    def arc_coordinate(self, p) -> float:
        """Arc-length coordinate of a point assumed on the boundary."""
        raise NotImplementedError

    def signed_boundary_distance(self, p) -> float:
        """Negative inside, positive outside, zero on the boundary."""
        raise NotImplementedError

    def boundary_distance(self, p) -> float:
        """Unsigned distance from ``p`` to the boundary curve."""
        return abs(self.signed_boundary_distance(p))

    def contains(self, p, tol: float = 0.0) -> bool:
        return self.signed_boundary_distance(p) <= tol

    def project_to_boundary(self, p) -> BoundaryPoint:
        """Closest point of the closed convex set, required to be on the
        boundary: raises :class:`InteriorPointError` for interior points."""
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def area(self) -> float:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    # --- shared helpers -------------------------------------------------

    def boundary_samples(self, n: int) -> np.ndarray:
        """``n`` boundary points at uniform arc-length spacing, as (n, 2)."""
        ss = np.arange(n) * (self.boundary_length / n)
        return np.array([self.boundary_param(s).xy for s in ss])


class Disc(ConvexDomain):
    kind = "disc"
    strictly_convex = True

    def __init__(self, center=(0.0, 0.0), radius: float = 1.0):
        radius = float(radius)
        if not radius > 0:
            raise ValueError("disc radius must be positive")
        self.center = (float(center[0]), float(center[1]))
        self.radius = radius

    def __repr__(self):
        return f"Disc(center={self.center}, radius={self.radius})"

    @property
    def boundary_length(self) -> float:
        return 2.0 * math.pi * self.radius

    def boundary_param(self, s: float) -> BoundaryPoint:
        L = self.boundary_length
        s = float(s) % L
        theta = s / self.radius
        c, sn = math.cos(theta), math.sin(theta)
        xy = (self.center[0] + self.radius * c, self.center[1] + self.radius * sn)
        tangent = (-sn, c)
        return BoundaryPoint(s, xy, tangent, _rot90(tangent))

    def arc_coordinate(self, p) -> float:
        theta = math.atan2(p[1] - self.center[1], p[0] - self.center[0])
        return (theta % (2.0 * math.pi)) * self.radius

    def signed_boundary_distance(self, p) -> float:
        return math.hypot(p[0] - self.center[0], p[1] - self.center[1]) - self.radius

    def project_to_boundary(self, p) -> BoundaryPoint:
        d = self.signed_boundary_distance(p)
        if d < -ON_BOUNDARY_TOL:
            raise InteriorPointError(f"point {tuple(p)} lies inside the disc")
        return self.boundary_param(self.arc_coordinate(p))

    def diameter(self) -> float:
        return 2.0 * self.radius

    def area(self) -> float:
        return math.pi * self.radius**2

    def to_json(self) -> dict:
        return {"kind": "disc", "center": list(self.center), "radius": self.radius}


class ConvexPolygon(ConvexDomain):
    kind = "polygon"
    strictly_convex = False

    def __init__(self, vertices):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
            raise ValueError("polygon needs at least 3 planar vertices")
        edges = np.roll(V, -1, axis=0) - V
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(
            edges, -1, axis=0
        )[:, 0]
        scale = float(np.abs(edges).max())
        if np.any(cross <= 1e-12 * scale * scale):
            raise ValueError(
                "vertices must be strictly counterclockwise and convex, "
                "with no collinear consecutive triples"
            )
        self.vertices = V
        self._edge_vec = edges
        self._edge_len = np.hypot(edges[:, 0], edges[:, 1])
        self._cum = np.concatenate([[0.0], np.cumsum(self._edge_len)])

    def __repr__(self):
        return f"ConvexPolygon({self.vertices.tolist()})"

    @property
    def boundary_length(self) -> float:
        return float(self._cum[-1])

    def _locate(self, s: float) -> tuple[int, float]:
        """Edge index and offset along it for arc coordinate ``s``."""
        L = self.boundary_length
        s = float(s) % L
        i = int(np.searchsorted(self._cum, s, side="right")) - 1
        i = min(max(i, 0), len(self.vertices) - 1)
        return i, s - self._cum[i]

    def boundary_param(self, s: float) -> BoundaryPoint:
        i, off = self._locate(s)
        d = self._edge_vec[i] / self._edge_len[i]
        xy = self.vertices[i] + off * d
        tangent = (float(d[0]), float(d[1]))
        return BoundaryPoint(
            float(s) % self.boundary_length,
            (float(xy[0]), float(xy[1])),
            tangent,
            _rot90(tangent),
        )

    def tangent_in(self, s: float) -> tuple[float, float]:
        """Left-limit (incoming) tangent at arc coordinate ``s``."""
        L = self.boundary_length
        s = float(s) % L
        i = int(np.searchsorted(self._cum, s, side="left")) - 1
        if s == 0.0:
            i = len(self.vertices) - 1
        i = min(max(i, 0), len(self.vertices) - 1)
        d = self._edge_vec[i] / self._edge_len[i]
        return (float(d[0]), float(d[1]))

    def arc_coordinate(self, p) -> float:
        p = np.asarray(p, dtype=float)
        i, t = self._closest_edge(p)
        return float((self._cum[i] + t * self._edge_len[i]) % self.boundary_length)

    def _closest_edge(self, p) -> tuple[int, float]:
        rel = p - self.vertices
        t = np.einsum("ij,ij->i", rel, self._edge_vec) / self._edge_len**2
        t = np.clip(t, 0.0, 1.0)
        foot = self.vertices + t[:, None] * self._edge_vec
        d2 = np.einsum("ij,ij->i", foot - p, foot - p)
        i = int(np.argmin(d2))
        return i, float(t[i])

    def signed_boundary_distance(self, p) -> float:
        p = np.asarray(p, dtype=float)
        i, t = self._closest_edge(p)
        foot = self.vertices[i] + t * self._edge_vec[i]
        d = float(np.hypot(*(p - foot)))
        rel = p - self.vertices
        cross = self._edge_vec[:, 0] * rel[:, 1] - self._edge_vec[:, 1] * rel[:, 0]
        inside = bool(np.all(cross >= 0.0))
        return -d if inside else d

    def project_to_boundary(self, p) -> BoundaryPoint:
        if self.signed_boundary_distance(p) < -ON_BOUNDARY_TOL:
            raise InteriorPointError(f"point {tuple(p)} lies inside the polygon")
        p = np.asarray(p, dtype=float)
        i, t = self._closest_edge(p)
        s = self._cum[i] + t * self._edge_len[i]
        return self.boundary_param(s)

    def diameter(self) -> float:
        V = self.vertices
        d2 = np.sum((V[:, None, :] - V[None, :, :]) ** 2, axis=-1)
        return float(math.sqrt(d2.max()))

    def area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def edge_arcs(self) -> list[tuple[float, float]]:
        """Arc-length interval of each maximal boundary segment."""
        return [
            (float(self._cum[i]), float(self._cum[i + 1]))
            for i in range(len(self.vertices))
        ]

    def to_json(self) -> dict:
        return {"kind": "polygon", "vertices": self.vertices.tolist()}


def domain_from_json(spec: dict) -> ConvexDomain:
    kind = spec.get("kind")
    if kind == "disc":
        return Disc(center=spec.get("center", (0.0, 0.0)), radius=spec["radius"])
    if kind == "polygon":
        return ConvexPolygon(spec["vertices"])
    raise ValueError(f"unknown domain kind {kind!r}")


def hausdorff_boundary_distance(
    a: ConvexDomain, b: ConvexDomain, n_samples: int = 4096
) -> float:
    """Symmetric Hausdorff distance between the two boundary curves.

    One side is sampled densely; the distance to the other boundary is
    evaluated exactly, so the result is accurate to O(perimeter/n_samples).
    """
    d_ab = max(b.boundary_distance(p) for p in a.boundary_samples(n_samples))
    d_ba = max(a.boundary_distance(p) for p in b.boundary_samples(n_samples))
    return max(d_ab, d_ba)
