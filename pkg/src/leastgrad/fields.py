"""Transport density and flux fields on a uniform grid.

Each plan segment spreads its mass along its length: per grid cell the
scalar measure ``sigma`` accumulates mass times chord length and the
vector measure ``p_vec`` accumulates mass times chord vector, so the
exact identity "total sigma + boundary mass = plan cost" holds for every
cell size. Segments lying inside a flat boundary piece of a polygon are
booked as boundary mass instead of interior density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooSmallError
from .geometry import ConvexDomain, ConvexPolygon
from .transport import CostNorm, PlanPair, TransportPlan

COLLINEAR_REL_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell grid: cell (ix, iy) covers [x0+ix*h, x0+(ix+1)*h) x ..."""

    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.h <= 0 or self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs positive cell size and extents")

    @classmethod
    def cover(cls, domain: ConvexDomain, n: int, margin: float = 1e-9) -> "GridSpec":
        """Square n-by-n grid covering the domain's bounding box."""
        pts = domain.boundary_samples(max(4 * n, 256))
        lo = pts.min(axis=0) - margin
        hi = pts.max(axis=0) + margin
        side = float(max(hi - lo))
        return cls(float(lo[0]), float(lo[1]), side / n, n, n)

    @property
    def x1(self) -> float:
        return self.x0 + self.nx * self.h

    @property
    def y1(self) -> float:
        return self.y0 + self.ny * self.h

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        ix = int((x - self.x0) / self.h)
        iy = int((y - self.y0) / self.h)
        return min(max(ix, 0), self.nx - 1), min(max(iy, 0), self.ny - 1)

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinate axes (length nx and ny)."""
        xs = self.x0 + (np.arange(self.nx) + 0.5) * self.h
        ys = self.y0 + (np.arange(self.ny) + 0.5) * self.h
        return xs, ys

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


@dataclass
class DensityGrid:
    grid: GridSpec
    sigma: np.ndarray  # (ny, nx) per-cell measure
    p_vec: np.ndarray  # (ny, nx, 2) per-cell vector measure
    boundary_mass: float

    def total_sigma(self) -> float:
        return float(self.sigma.sum())

    def max_flux_excess(self) -> float:
        """max over cells of |p_vec| - sigma (must be <= rounding)."""
        return float(
            (np.hypot(self.p_vec[..., 0], self.p_vec[..., 1]) - self.sigma).max()
        )

    def to_csv(self) -> str:
        xs, ys = self.grid.centers()
        lines = ["x,y,sigma,px,py"]
        for iy in range(self.grid.ny):
            for ix in range(self.grid.nx):
                lines.append(
                    f"{xs[ix]:.12g},{ys[iy]:.12g},{self.sigma[iy, ix]:.12g},"
                    f"{self.p_vec[iy, ix, 0]:.12g},{self.p_vec[iy, ix, 1]:.12g}"
                )
        return "\n".join(lines) + "\n"


def _segment_breakpoints(a, b, grid: GridSpec):
    """Sorted parameters in [0, 1] where segment a->b crosses grid lines."""
    ts = [0.0, 1.0]
    dx, dy = b[0] - a[0], b[1] - a[1]
    if dx != 0.0:
        k0 = math.ceil(min(a[0], b[0]) / grid.h - grid.x0 / grid.h)
        x = grid.x0 + k0 * grid.h
        while x < max(a[0], b[0]):
            t = (x - a[0]) / dx
            if 0.0 < t < 1.0:
                ts.append(t)
            x += grid.h
    if dy != 0.0:
        k0 = math.ceil(min(a[1], b[1]) / grid.h - grid.y0 / grid.h)
        y = grid.y0 + k0 * grid.h
        while y < max(a[1], b[1]):
            t = (y - a[1]) / dy
            if 0.0 < t < 1.0:
                ts.append(t)
            y += grid.h
    ts.sort()
    return ts


def _boundary_overlap(pair: PlanPair, domain: ConvexDomain) -> float:
    """H^1 length of the pair's segment lying inside the boundary curve."""
    if not isinstance(domain, ConvexPolygon):
        return 0.0
    a, b = pair.source.xy, pair.target.xy
    tol = COLLINEAR_REL_TOL * domain.diameter()
    V = domain.vertices
    E = domain._edge_vec
    for i in range(len(V)):
        vx, vy = V[i]
        ex, ey = E[i]
        el = float(math.hypot(ex, ey))
        da = abs((a[0] - vx) * ey - (a[1] - vy) * ex) / el
        db = abs((b[0] - vx) * ey - (b[1] - vy) * ex) / el
        if da <= tol and db <= tol:
            # both endpoints on this edge line; by convexity the segment
            # lies inside the edge
            return pair.length
    return 0.0


def boundary_mass(plan: TransportPlan, domain: ConvexDomain) -> float:
    """Total plan mass times overlap length carried on the boundary itself.

    Zero for strictly convex domains: a chord meets the circle only at its
    endpoints. For polygons, segments collinear with a boundary edge
    contribute mass times overlap length.
    """
    total = 0.0
    for pair in plan.pairs:
        ov = _boundary_overlap(pair, domain)
        if ov > 0.0:
            total += pair.mass * ov
    return float(total)


def rasterize_density(
    plan: TransportPlan, grid: GridSpec, domain: ConvexDomain | None = None
) -> DensityGrid:
    """Spread each segment's mass over the cells it crosses.

    With a polygonal ``domain`` given, segments lying inside a boundary
    edge are booked as ``boundary_mass`` instead, so the identity
    "sum(sigma) + boundary_mass = plan cost" is preserved exactly.
    """
    for pair in plan.pairs:
        for p in (pair.source.xy, pair.target.xy):
            if not grid.contains(p[0], p[1]):
                raise GridTooSmallError(f"plan endpoint {p} outside the grid")

    sigma = np.zeros((grid.ny, grid.nx))
    p_vec = np.zeros((grid.ny, grid.nx, 2))
    b_mass = 0.0
    for pair in plan.pairs:
        a, b = pair.source.xy, pair.target.xy
        seg_len = pair.length
        if seg_len == 0.0:
            continue
        if domain is not None and _boundary_overlap(pair, domain) > 0.0:
            b_mass += pair.mass * seg_len
            continue
        dx, dy = b[0] - a[0], b[1] - a[1]
        ts = _segment_breakpoints(a, b, grid)
        for t0, t1 in zip(ts, ts[1:]):
            if t1 <= t0:
                continue
            tm = 0.5 * (t0 + t1)
            ix, iy = grid.cell_of(a[0] + tm * dx, a[1] + tm * dy)
            w = t1 - t0
            sigma[iy, ix] += pair.mass * w * seg_len
            p_vec[iy, ix, 0] += pair.mass * w * dx
            p_vec[iy, ix, 1] += pair.mass * w * dy
    return DensityGrid(grid, sigma, p_vec, b_mass)


@dataclass(frozen=True)
class SbvSplit:
    """Plan fragments by (source, target) origin: jump vs smooth data.

    gamma1 transports between atoms of the datum's jump part (the
    solution's singular set), gamma4 between quantized smooth parts;
    gamma2/gamma3 are the mixed fragments.
    """

    gamma1: TransportPlan
    gamma2: TransportPlan
    gamma3: TransportPlan
    gamma4: TransportPlan

    @property
    def fragments(self) -> tuple[TransportPlan, ...]:
        return (self.gamma1, self.gamma2, self.gamma3, self.gamma4)

    def cost_sum(self) -> float:
        return sum(f.cost for f in self.fragments)

    def singular_segments(self) -> list[tuple[tuple, tuple, float]]:
        """Explicit (source, target, mass) list of the jump-to-jump part."""
        return [
            (p.source.xy, p.target.xy, p.mass) for p in self.gamma1.pairs
        ]


def sbv_split(plan: TransportPlan, cost: CostNorm | None = None) -> SbvSplit:
    """Partition the plan by origin tags of each pair's endpoints."""
    cost = cost or CostNorm.euclidean()
    buckets = {
        ("atomic", "atomic"): [],
        ("atomic", "diffuse"): [],
        ("diffuse", "atomic"): [],
        ("diffuse", "diffuse"): [],
    }
    for pair in plan.pairs:
        buckets[(pair.source_tag, pair.target_tag)].append(pair)

    def fragment(pairs):
        total = sum(
            p.mass
            * cost(p.source.xy[0] - p.target.xy[0], p.source.xy[1] - p.target.xy[1])
            for p in pairs
        )
        return TransportPlan(tuple(pairs), total)

    return SbvSplit(
        fragment(buckets[("atomic", "atomic")]),
        fragment(buckets[("atomic", "diffuse")]),
        fragment(buckets[("diffuse", "atomic")]),
        fragment(buckets[("diffuse", "diffuse")]),
    )


def density_norms(
    dens: DensityGrid, p: float, excluded_region=None
) -> tuple[float, float]:
    """(L^p, L^inf) of the cell-averaged density sigma / h^2.

    ``excluded_region`` is an optional predicate on cell centers; cells
    inside the region are skipped (both norms).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    h = dens.grid.h
    density = dens.sigma / (h * h)
    if excluded_region is not None:
        xs, ys = dens.grid.centers()
        keep = np.ones_like(density, dtype=bool)
        for iy in range(dens.grid.ny):
            for ix in range(dens.grid.nx):
                if excluded_region(xs[ix], ys[iy]):
                    keep[iy, ix] = False
        density = np.where(keep, density, 0.0)
    lp = float((np.sum(density**p) * h * h) ** (1.0 / p))
    linf = float(density.max()) if density.size else 0.0
    return lp, linf
