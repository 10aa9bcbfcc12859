"""Stability experiments and closed-form references.

Three experiment drivers:

* data stability: quantize the datum to ``n`` levels, rescale back to the
  original total variation, solve, and compare reconstructions against the
  finest level on a fixed evaluation grid;
* domain approximation: solve on outer scaled discs and compare the
  restricted solutions with the solution on the original disc, checking
  that the mapped datum preserves total variation exactly and that the
  discretized measure pushes forward atom-for-atom;
* polygon monotonicity check: data continuous at vertices and monotone on
  every edge force all transport off the boundary, so a solution exists;
  otherwise the boundary mass of the optimal plan decides existence.

The module also provides the closed-form disc solutions for the data
``cos(2 theta)`` (unique minimizer, calibration, potential) and its +-1
jump modification (the one-parameter family of minimizers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryBV, JumpSpec, Piece, discretize
from .errors import NotStrictlyConvexError, OnCaseBoundaryError
from .fields import GridSpec
from .geometry import ConvexDomain, ConvexPolygon, Disc
from .pipeline import SolveResult, solve_lgp

CASE_TOL = 1e-12
IDENTITY_TOL = 1e-12
SLACK = 1.10  # non-increasing verdicts tolerate a 10% band

_SQ2H = math.sqrt(2.0) / 2.0


# --------------------------------------------------------------------------
# quantization of boundary data
# --------------------------------------------------------------------------


def quantize(g: BoundaryBV, n_levels: int) -> BoundaryBV:
    """Piecewise-constant datum taking the nearest of ``n_levels`` values.

    Levels are spread uniformly over [min g, max g] including both
    endpoints, so data already taking only extreme values (indicators)
    are fixed points of the quantization. Sampled pieces are cut exactly
    where the linear interpolant crosses a midpoint between levels.
    """
    if n_levels < 2:
        raise ValueError("need at least 2 quantization levels")
    vals = []
    for p in g.pieces:
        if p.values is None:
            vals.append(p.value)
        else:
            vals.extend(float(v) for v in p.values)
    for j in g.jumps:
        vals.extend((j.left, j.right))
    vmin, vmax = min(vals), max(vals)
    if vmax - vmin <= 0.0:
        return g  # constant datum: nothing to quantize
    levels = np.linspace(vmin, vmax, n_levels)
    dv = (vmax - vmin) / (n_levels - 1)

    def idx(v: float) -> int:
        return int(np.clip(round((v - vmin) / dv), 0, n_levels - 1))

    breaks: list[float] = []
    values: list[float] = []

    def append(s: float, level: int):
        v = float(levels[level])
        if values and values[-1] == v:
            return
        breaks.append(s)
        values.append(v)

    for p in g.pieces:
        if p.values is None:
            append(p.s0, idx(p.value))
            continue
        k = len(p.values) - 1
        h = (p.s1 - p.s0) / k
        cur = idx(float(p.values[0]))
        append(p.s0, cur)
        for j in range(k):
            va, vb = float(p.values[j]), float(p.values[j + 1])
            target = idx(vb)
            step = 1 if target > cur else -1
            while cur != target:
                thr = float(0.5 * (levels[cur] + levels[cur + step]))
                t = (thr - va) / (vb - va)
                append(p.s0 + (j + min(max(t, 0.0), 1.0)) * h, cur + step)
                cur += step

    if len(values) == 1:
        return BoundaryBV(
            g.domain, [Piece(0.0, g.domain.boundary_length, value=values[0])]
        )
    return BoundaryBV.piecewise_constant(g.domain, breaks, values)


# --------------------------------------------------------------------------
# stability reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    level: float
    datum_tv: float
    cost: float
    l1_distance: float
    tv_gap: float
    identity_residual: float = 0.0
    pushforward_residual: float = 0.0

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "datum_tv": self.datum_tv,
            "cost": self.cost,
            "l1_distance": self.l1_distance,
            "tv_gap": self.tv_gap,
            "identity_residual": self.identity_residual,
            "pushforward_residual": self.pushforward_residual,
        }


@dataclass(frozen=True)
class StabilityReport:
    kind: str  # "data" | "domain"
    records: tuple[StepRecord, ...]
    verdicts: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "records": [r.to_json() for r in self.records],
            "verdicts": dict(self.verdicts),
            "tolerances": dict(self.tolerances),
        }


def _non_increasing(xs, slack: float = SLACK) -> bool:
    return all(b <= a * slack + 1e-15 for a, b in zip(xs, xs[1:]))


def _eval_points(domain: ConvexDomain, grid_n: int):
    """Cell centers of a covering grid that lie inside the domain."""
    grid = GridSpec.cover(domain, grid_n)
    xs, ys = grid.centers()
    X, Y = np.meshgrid(xs, ys)
    inside = np.array(
        [domain.contains((x, y)) for x, y in zip(X.ravel(), Y.ravel())]
    ).reshape(X.shape)
    return X[inside], Y[inside], grid.h * grid.h


def run_data_stability(
    g: BoundaryBV,
    schedule,
    grid_n: int = 256,
) -> StabilityReport:
    """Quantize-rescale-solve for each level; compare to the finest level.

    Each quantized datum is rescaled so its total variation matches the
    original datum's exactly, then solved as a pure-jump problem. The
    reference solution is the finest schedule level; per-level records
    hold the L1 distance of the reconstructions on a fixed grid and the
    gap between solution total variations.
    """
    schedule = list(schedule)
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be increasing")
    domain = g.domain
    tv_target = g.total_variation()
    if tv_target <= 0.0:
        # constant datum: every level reproduces the constant
        records = tuple(
            StepRecord(level=n, datum_tv=0.0, cost=0.0, l1_distance=0.0, tv_gap=0.0)
            for n in schedule
        )
        return StabilityReport(
            "data",
            records,
            {"l1_non_increasing": True, "tv_gap_non_increasing": True},
            {"slack": SLACK},
        )

    X, Y, _cell = _eval_points(domain, grid_n)
    runs = []
    for n in schedule:
        g_n = quantize(g, n)
        raw_tv = g_n.total_variation()
        g_n = g_n.rescale_to_tv(tv_target)
        res = solve_lgp(domain, g_n, n_diffuse=1)
        u_n = res.solution.evaluate_many(X, Y)
        runs.append((n, raw_tv, res, u_n))

    u_ref = runs[-1][3]
    tv_ref = runs[-1][2].total_variation()
    records = []
    for n, raw_tv, res, u_n in runs:
        l1 = float(np.abs(u_n - u_ref).mean()) * domain.area()
        records.append(
            StepRecord(
                level=n,
                datum_tv=raw_tv,
                cost=res.cost,
                l1_distance=l1,
                tv_gap=abs(res.total_variation() - tv_ref),
            )
        )
    head = records[:-1]  # the reference step compares to itself
    verdicts = {
        "l1_non_increasing": _non_increasing([r.l1_distance for r in head]),
        "tv_gap_non_increasing": _non_increasing([r.tv_gap for r in head]),
    }
    return StabilityReport("data", tuple(records), verdicts, {"slack": SLACK})


def _scaled_datum(g: BoundaryBV, domain_out: Disc, scale: float) -> BoundaryBV:
    """Pull the datum onto the scaled disc along radial projection.

    Arc coordinates scale by the radius ratio while values are kept, so
    the total variation is preserved exactly.
    """
    pieces = []
    for p in g.pieces:
        if p.values is None:
            pieces.append(Piece(p.s0 * scale, p.s1 * scale, value=p.value))
        else:
            pieces.append(Piece(p.s0 * scale, p.s1 * scale, values=p.values.copy()))
    jumps = [JumpSpec(j.s * scale, j.left, j.right) for j in g.jumps]
    return BoundaryBV(domain_out, pieces, jumps)


def run_domain_approx(
    domain: ConvexDomain,
    g: BoundaryBV,
    eps_schedule,
    n_diffuse: int = 180,
    grid_n: int = 256,
) -> StabilityReport:
    """Solve on outer discs (1+eps) * Omega and restrict to Omega.

    Requires a disc (scaled polygons are not strictly convex). Records
    per step the exact-total-variation residual of the mapped datum, the
    atom-for-atom pushforward residual of the discretized measures, and
    the L1 distance of the restricted solution to the direct one.
    """
    if not isinstance(domain, Disc):
        raise NotStrictlyConvexError(
            "outer approximation by scaling requires a disc domain"
        )
    eps_schedule = list(eps_schedule)
    if any(b >= a for a, b in zip(eps_schedule, eps_schedule[1:])):
        raise ValueError("eps schedule must be decreasing")
    tv = g.total_variation()

    X, Y, _cell = _eval_points(domain, grid_n)
    ref = solve_lgp(domain, g, n_diffuse)
    u_ref = ref.solution.evaluate_many(X, Y)
    tv_ref = ref.total_variation()
    mu_ref = ref.mu

    records = []
    for eps in eps_schedule:
        scale = 1.0 + eps
        dom_n = Disc(domain.center, domain.radius * scale)
        g_n = _scaled_datum(g, dom_n, scale)
        identity = abs(g_n.total_variation() - tv)

        push = 0.0
        if mu_ref is not None:
            mu_n = discretize(g_n.tangential_derivative(), n_diffuse)
            for side_n, side in (
                (mu_n.positive, mu_ref.positive),
                (mu_n.negative, mu_ref.negative),
            ):
                if len(side_n) != len(side):
                    push = math.inf
                    break
                for a_n, a in zip(side_n, side):
                    push = max(
                        push,
                        abs(a_n.point.s / scale - a.point.s),
                        abs(a_n.mass - a.mass),
                    )

        res = solve_lgp(dom_n, g_n, n_diffuse)
        u_n = res.solution.evaluate_many(X, Y)
        records.append(
            StepRecord(
                level=eps,
                datum_tv=g_n.total_variation(),
                cost=res.cost,
                l1_distance=float(np.abs(u_n - u_ref).mean()) * domain.area(),
                tv_gap=abs(res.total_variation() - tv_ref),
                identity_residual=identity,
                pushforward_residual=push,
            )
        )
    verdicts = {
        "l1_non_increasing": _non_increasing([r.l1_distance for r in records]),
        "identity_exact": all(r.identity_residual <= IDENTITY_TOL for r in records),
        "pushforward_exact": all(
            r.pushforward_residual <= 1e-9 for r in records
        ),
    }
    return StabilityReport(
        "domain",
        tuple(records),
        verdicts,
        {"slack": SLACK, "identity": IDENTITY_TOL},
    )


# --------------------------------------------------------------------------
# polygon monotonicity dichotomy
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneVerdict:
    monotone: bool
    violations: tuple[str, ...]
    boundary_mass: float
    exists: bool
    result: SolveResult

    @property
    def message(self) -> str:
        if self.exists:
            return "least gradient solution exists"
        return (
            "no least gradient solution: "
            f"boundary mass {round(float(self.boundary_mass), 12)!r} on edge l"
        )


def check_monotone_polygon(
    domain: ConvexPolygon, g: BoundaryBV, n_diffuse: int = 180
) -> MonotoneVerdict:
    """Edge-monotonicity dichotomy on a convex polygon.

    Data continuous at the vertices and monotone along every edge admit
    a solution (the optimal plan carries no boundary mass); otherwise
    existence is decided by solving and inspecting the boundary mass.
    """
    L = domain.boundary_length
    tol = 1e-12 * max(1.0, g.total_variation())
    violations = []

    corners = [a for a, _ in domain.edge_arcs]
    for j in g.jumps:
        s = j.s % L
        for c in corners:
            d = abs(s - c) % L
            if min(d, L - d) <= 1e-9 and abs(j.height) > tol:
                violations.append(f"jump of height {j.height:g} at vertex s={c:g}")

    for k, (a, b) in enumerate(domain.edge_arcs):
        inc_pos = inc_neg = 0.0
        for p in g.pieces:
            if p.values is None:
                continue
            lo, hi = max(p.s0, a), min(p.s1, b)
            if hi <= lo:
                continue
            kseg = len(p.values) - 1
            h = (p.s1 - p.s0) / kseg
            for i in range(kseg):
                n0, n1 = p.s0 + i * h, p.s0 + (i + 1) * h
                if n1 <= a + 1e-12 or n0 >= b - 1e-12:
                    continue
                d = float(p.values[i + 1] - p.values[i])
                w = (min(n1, b) - max(n0, a)) / h
                inc_pos += max(d, 0.0) * w
                inc_neg += min(d, 0.0) * w
        for j in g.jumps:
            s = j.s % L
            if a + 1e-9 < s < b - 1e-9:
                inc_pos += max(j.height, 0.0)
                inc_neg += min(j.height, 0.0)
        if inc_pos > tol and inc_neg < -tol:
            violations.append(f"edge {k} is not monotone")

    res = solve_lgp(domain, g, n_diffuse)
    return MonotoneVerdict(
        monotone=not violations,
        violations=tuple(violations),
        boundary_mass=res.boundary_mass,
        exists=res.exists,
        result=res,
    )


# --------------------------------------------------------------------------
# closed-form disc references
# --------------------------------------------------------------------------


def brothers_g1(n_samples: int = 720) -> BoundaryBV:
    """Continuous datum cos(2 theta) on the unit circle."""
    if n_samples % 8:
        raise ValueError("n_samples must be divisible by 8")
    return BoundaryBV.from_function(
        Disc(), lambda s: math.cos(2.0 * s), n_samples=n_samples
    )


def brothers_g2(samples_per_arc: int = 180) -> BoundaryBV:
    """cos(2 theta) shifted by +1 on the arcs |x| > sqrt(2)/2 and by -1 on
    the arcs |y| > sqrt(2)/2, with height-2 jumps at the four diagonal
    boundary points."""
    q = math.pi / 4.0

    def arc(k0: int, k1: int, offset: float) -> Piece:
        ss = np.linspace(k0 * q, k1 * q, (k1 - k0) * samples_per_arc + 1)
        return Piece(k0 * q, k1 * q, values=np.cos(2.0 * ss) + offset)

    pieces = [arc(0, 1, +1.0), arc(1, 3, -1.0), arc(3, 5, +1.0), arc(5, 7, -1.0),
              arc(7, 8, +1.0)]
    jumps = [
        JumpSpec(1 * q, 1.0, -1.0),
        JumpSpec(3 * q, -1.0, 1.0),
        JumpSpec(5 * q, 1.0, -1.0),
        JumpSpec(7 * q, -1.0, 1.0),
    ]
    return BoundaryBV(Disc(), pieces, jumps)


def _require_in_disc(x: float, y: float):
    if x * x + y * y >= 1.0:
        raise ValueError(f"point ({x}, {y}) is not inside the unit disc")


def _guard(*exprs: float):
    for e in exprs:
        if abs(e) <= CASE_TOL:
            raise OnCaseBoundaryError("point lies on a case-region boundary")


def brothers_reference(which: str, p, lam: float | None = None):
    """Closed-form values of the disc solutions for cos(2 theta) data.

    ``which``:

    * ``"u1"``   -- the unique minimizer for g(theta) = cos(2 theta);
    * ``"z1"``   -- the piecewise-constant calibration vector field;
    * ``"phi1"`` -- the cone-shaped dual potential (zero minimum);
    * ``"u2"``   -- the minimizer family for the +-1 jump modification,
      parametrized by the central value ``lam`` in [-1, 1].

    Raises OnCaseBoundary within 1e-12 of the case-region boundaries.
    """
    x, y = float(p[0]), float(p[1])
    _require_in_disc(x, y)

    if which == "u1":
        _guard(abs(x) - _SQ2H, abs(y) - _SQ2H)
        if abs(x) > _SQ2H:
            return 2.0 * x * x - 1.0
        if abs(y) > _SQ2H:
            return 1.0 - 2.0 * y * y
        return 0.0

    if which == "z1":
        _guard(y - x, y + x)
        if -x < y < x:
            return (1.0, 0.0)
        if y > x and y > -x:
            return (0.0, -1.0)
        if x < y < -x:
            return (-1.0, 0.0)
        return (0.0, 1.0)

    if which == "phi1":
        _guard(y - x, y + x)
        if -x < y < x:
            return -y + _SQ2H
        if y > x and y > -x:
            return -x + _SQ2H
        if x < y < -x:
            return y + _SQ2H
        return x + _SQ2H

    if which == "u2":
        if lam is None or not -1.0 <= lam <= 1.0:
            raise ValueError("u2 needs a central value lam in [-1, 1]")
        _guard(abs(x) - _SQ2H, abs(y) - _SQ2H)
        if abs(x) > _SQ2H:
            return 2.0 * x * x
        if abs(y) > _SQ2H:
            return -2.0 * y * y
        return float(lam)

    raise ValueError(f"unknown reference {which!r}")
