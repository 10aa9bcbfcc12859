"""Exact discrete transportation between boundary atom measures.

The solver is a transportation simplex on the bipartite graph: Dantzig
entering rule with lexicographic tie-breaking for speed, falling back to
Bland's rule when degenerate pivots stall, so the output vertex is
deterministic and cycling is impossible. A pruned exhaustive enumeration
of vertex allocations serves as an independent oracle on small instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryMeasurePair, MassAtom
from .errors import (
    CrossingSegmentsError,
    NumericFailureError,
    TooLargeError,
    UnbalancedError,
)
from .geometry import BoundaryPoint

BALANCE_TOL = 1e-12
ORACLE_MAX_ATOMS = 6


class CostNorm:
    """A strictly convex norm used as transport cost c(x - y)."""

    def __init__(self, evaluator=None, name="euclidean"):
        self.name = name
        self._evaluator = evaluator

    @classmethod
    def euclidean(cls) -> "CostNorm":
        return cls()

    @property
    def is_euclidean(self) -> bool:
        return self._evaluator is None

    def __call__(self, dx, dy):
        if self._evaluator is None:
            return math.hypot(dx, dy)
        return self._evaluator(dx, dy)

    def pairwise(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Cost matrix c[i, j] = norm(X[i] - Y[j])."""
        if self._evaluator is None:
            d = X[:, None, :] - Y[None, :, :]
            return np.hypot(d[..., 0], d[..., 1])
        C = np.empty((len(X), len(Y)))
        for i, x in enumerate(X):
            for j, y in enumerate(Y):
                C[i, j] = self._evaluator(x[0] - y[0], x[1] - y[1])
        return C

    def check_axioms(self, rng=None, n=64, tol=1e-9, strict_margin=1e-9):
        """Spot-check norm axioms and strict convexity on random vectors."""
        rng = rng or np.random.default_rng(0)
        V = rng.normal(size=(n, 2))
        for v in V:
            nv = self(v[0], v[1])
            if nv <= 0:
                raise ValueError("norm not positive on a nonzero vector")
            for lam in (0.5, 2.0, -3.0):
                if abs(self(lam * v[0], lam * v[1]) - abs(lam) * nv) > tol * (
                    1 + abs(lam) * nv
                ):
                    raise ValueError("norm is not homogeneous")
        for u, v in zip(V[::2], V[1::2]):
            s = self(u[0] + v[0], u[1] + v[1])
            if s > self(u[0], u[1]) + self(v[0], v[1]) + tol:
                raise ValueError("triangle inequality fails")
            cross = u[0] * v[1] - u[1] * v[0]
            if abs(cross) > 1e-6:
                if s >= self(u[0], u[1]) + self(v[0], v[1]) - strict_margin:
                    raise ValueError("norm is not strictly convex")


@dataclass(frozen=True)
class PlanPair:
    source: BoundaryPoint
    target: BoundaryPoint
    mass: float
    source_tag: str
    target_tag: str

    @property
    def length(self) -> float:
        return math.hypot(
            self.source.xy[0] - self.target.xy[0],
            self.source.xy[1] - self.target.xy[1],
        )


@dataclass(frozen=True)
class TransportPlan:
    pairs: tuple[PlanPair, ...]
    cost: float

    @property
    def total_mass(self) -> float:
        return sum(p.mass for p in self.pairs)

    def marginal_residual(self, mu: BoundaryMeasurePair) -> float:
        """Largest per-atom mismatch between plan marginals and mu."""
        res = 0.0
        for atoms, key in ((mu.positive, "source"), (mu.negative, "target")):
            sums = {}
            for p in self.pairs:
                pt = getattr(p, key).xy
                sums[pt] = sums.get(pt, 0.0) + p.mass
            for a in atoms:
                res = max(res, abs(sums.pop(a.point.xy, 0.0) - a.mass))
            for leftover in sums.values():
                res = max(res, abs(leftover))
        return res

    def to_json(self) -> dict:
        return {
            "pairs": [
                {
                    "src": list(p.source.xy),
                    "dst": list(p.target.xy),
                    "mass": p.mass,
                    "src_tag": p.source_tag,
                    "dst_tag": p.target_tag,
                }
                for p in self.pairs
            ],
            "cost": self.cost,
        }


def _check_balance(mu: BoundaryMeasurePair):
    total = mu.total_mass
    if total <= 0:
        raise UnbalancedError("empty measure")
    if mu.balance_residual() > 1e-9 * total:
        raise UnbalancedError(
            f"mass imbalance {mu.balance_residual()} on total {total}"
        )


def _transportation_simplex(supply, demand, C, max_iters=None):
    """Primal transportation simplex. Returns (X, u, v) with X the basic
    solution (dict cell -> mass) and (u, v) the optimal duals."""
    m, n = C.shape
    if max_iters is None:
        max_iters = 200 * (m + n) * max(m, n) + 10000

    s = supply.copy()
    d = demand.copy()
    # northwest-corner start (deterministic)
    basis = {}
    row_adj = [[] for _ in range(m)]
    col_adj = [[] for _ in range(n)]

    def add_cell(i, j, val):
        basis[(i, j)] = val
        row_adj[i].append(j)
        col_adj[j].append(i)

    i = j = 0
    while i < m and j < n:
        q = min(s[i], d[j])
        add_cell(i, j, q)
        s[i] -= q
        d[j] -= q
        if i == m - 1 and j == n - 1:
            break
        if s[i] <= d[j] and i < m - 1:
            i += 1
        else:
            j += 1

    u = np.zeros(m)
    v = np.zeros(n)

    def compute_duals():
        u.fill(np.nan)
        v.fill(np.nan)
        u[0] = 0.0
        stack = [("r", 0)]
        while stack:
            kind, k = stack.pop()
            if kind == "r":
                for jj in row_adj[k]:
                    if math.isnan(v[jj]):
                        v[jj] = C[k, jj] - u[k]
                        stack.append(("c", jj))
            else:
                for ii in col_adj[k]:
                    if math.isnan(u[ii]):
                        u[ii] = C[ii, k] - v[k]
                        stack.append(("r", ii))
        if np.isnan(u).any() or np.isnan(v).any():
            raise NumericFailureError("basis tree is disconnected")

    def find_cycle(ei, ej):
        # path from row ei to col ej through the basis tree
        parent = {}
        start = ("r", ei)
        goal = ("c", ej)
        seen = {start}
        stack = [start]
        while stack:
            node = stack.pop()
            if node == goal:
                break
            kind, k = node
            if kind == "r":
                nbrs = [("c", jj) for jj in row_adj[k]]
            else:
                nbrs = [("r", ii) for ii in col_adj[k]]
            for nb in nbrs:
                if nb not in seen:
                    seen.add(nb)
                    parent[nb] = node
                    stack.append(nb)
        else:
            raise NumericFailureError("entering cell not connected to basis")
        path = [goal]
        while path[-1] != start:
            path.append(parent[path[-1]])
        path.reverse()  # r ei, c j1, r i1, ..., c ej
        cells = [(ei, ej)]
        for a, b in zip(path, path[1:]):
            if a[0] == "r":
                cells.append((a[1], b[1]))
            else:
                cells.append((b[1], a[1]))
        return cells  # alternating +,-,+,... starting with entering (+)

    tol = 1e-11 * (1.0 + float(np.max(C)))
    stall = 0
    for it in range(max_iters):
        compute_duals()
        R = C - u[:, None] - v[None, :]
        if stall < 30:
            flat = int(np.argmin(R))
            ei, ej = divmod(flat, n)
            if R[ei, ej] >= -tol:
                break
        else:
            # Bland: first improving cell in lexicographic order
            rows, cols = np.where(R < -tol)
            if len(rows) == 0:
                break
            ei, ej = int(rows[0]), int(cols[0])
        cycle = find_cycle(ei, ej)
        minus = cycle[1::2]
        theta = min(basis[c] for c in minus)
        leaving = min(c for c in minus if basis[c] <= theta)
        if theta <= 0.0:
            stall += 1
        else:
            stall = 0
        for k, c in enumerate(cycle):
            if k == 0:
                continue
            basis[c] = basis[c] + (theta if k % 2 == 0 else -theta)
        basis.pop(leaving)
        row_adj[leaving[0]].remove(leaving[1])
        col_adj[leaving[1]].remove(leaving[0])
        add_cell(ei, ej, theta)
    else:
        raise NumericFailureError("transportation simplex exceeded pivot bound")

    compute_duals()
    return basis, u, v


def solve_kantorovich(mu: BoundaryMeasurePair, cost: CostNorm = None) -> TransportPlan:
    """Exactly optimal basic solution of the transportation LP."""
    cost = cost or CostNorm.euclidean()
    _check_balance(mu)
    src = mu.positive
    dst = mu.negative
    X = np.array([a.point.xy for a in src])
    Y = np.array([a.point.xy for a in dst])
    C = cost.pairwise(X, Y)
    supply = np.array([a.mass for a in src], dtype=float)
    demand = np.array([a.mass for a in dst], dtype=float)
    # exact balance for the LP
    demand[-1] += supply.sum() - demand.sum()

    basis, u, v = _transportation_simplex(supply, demand, C)

    pairs = []
    total = 0.0
    # drop numerical dust left behind by degenerate pivots
    mass_floor = 1e-12 * supply.sum()
    for (i, j) in sorted(basis):
        mass = basis[(i, j)]
        if mass <= mass_floor:
            continue
        pairs.append(
            PlanPair(src[i].point, dst[j].point, mass, src[i].tag, dst[j].tag)
        )
        total += mass * C[i, j]
    return TransportPlan(tuple(pairs), total)


def brute_force_oracle(mu: BoundaryMeasurePair, cost: CostNorm = None):
    """Minimum cost over all vertex allocations, by pruned enumeration.

    Every basic feasible solution of the transportation polytope arises
    from some sequence of "pick a cell, allocate min(supply, demand)"
    steps, so exhausting those sequences (with branch-and-bound pruning)
    yields the exact optimum. Exponential time, small instances only.
    """
    cost = cost or CostNorm.euclidean()
    _check_balance(mu)
    m, n = len(mu.positive), len(mu.negative)
    if m > ORACLE_MAX_ATOMS or n > ORACLE_MAX_ATOMS:
        raise TooLargeError(f"oracle limited to {ORACLE_MAX_ATOMS} atoms per side")
    X = np.array([a.point.xy for a in mu.positive])
    Y = np.array([a.point.xy for a in mu.negative])
    C = cost.pairwise(X, Y)
    s0 = np.array([a.mass for a in mu.positive], dtype=float)
    d0 = np.array([a.mass for a in mu.negative], dtype=float)
    d0[-1] += s0.sum() - d0.sum()

    # greedy warm start for the upper bound
    def greedy():
        s, d = s0.copy(), d0.copy()
        alloc = []
        total = 0.0
        order = np.argsort(C, axis=None)
        for flat in order:
            i, j = divmod(int(flat), n)
            q = min(s[i], d[j])
            if q > 0:
                alloc.append((i, j, q))
                total += q * C[i, j]
                s[i] -= q
                d[j] -= q
        return total, alloc

    def vogel():
        # Vogel's approximation: repeatedly allocate in the row/column with
        # the largest regret (gap between its two cheapest active cells)
        s, d = s0.copy(), d0.copy()
        alloc = []
        total = 0.0
        while True:
            act_r = np.nonzero(s > 0)[0]
            act_c = np.nonzero(d > 0)[0]
            if len(act_r) == 0 or len(act_c) == 0:
                break
            sub = C[np.ix_(act_r, act_c)]
            best_gap, pick = -1.0, None
            for axis in (0, 1):
                lines = sub if axis == 0 else sub.T
                for k, line in enumerate(lines):
                    o = np.argsort(line)
                    gap = line[o[1]] - line[o[0]] if len(line) > 1 else math.inf
                    if gap > best_gap:
                        best_gap = gap
                        if axis == 0:
                            pick = (int(act_r[k]), int(act_c[o[0]]))
                        else:
                            pick = (int(act_r[o[0]]), int(act_c[k]))
            i, j = pick
            q = min(s[i], d[j])
            alloc.append((i, j, q))
            total += q * C[i, j]
            s[i] -= q
            d[j] -= q
        return total, alloc

    best_cost, best_alloc = min(greedy(), vogel(), key=lambda t: t[0])
    eps = 1e-12 * (1.0 + best_cost)
    tiny = 1e-14 * float(s0.sum())
    grid = tiny if tiny > 0 else 1e-300

    # plain Python lists: the recursion visits ~1e6 states and per-node
    # numpy overhead would dominate the run time
    Cl = [[float(C[i, j]) for j in range(n)] for i in range(m)]
    cells_by_cost = sorted(
        ((i, j) for i in range(m) for j in range(n)), key=lambda c: Cl[c[0]][c[1]]
    )

    def lower_bound(rows, cols, s, d):
        # dual-ascent bound: (u, v) with u_i + v_j <= C_ij is dual feasible,
        # so s.u + d.v bounds the remaining transport cost from below
        u = {i: min(Cl[i][j] for j in cols) for i in rows}
        v = {j: min(Cl[i][j] - u[i] for i in rows) for j in cols}
        for _ in range(2):
            for i in rows:
                u[i] += min(Cl[i][j] - u[i] - v[j] for j in cols)
            for j in cols:
                v[j] += min(Cl[i][j] - u[i] - v[j] for i in rows)
        return sum(s[i] * u[i] for i in rows) + sum(d[j] * v[j] for j in cols)

    s = [float(x) for x in s0]
    d = [float(x) for x in d0]
    stack_alloc = []
    # best cost at which each (state, last-allocation) node was expanded;
    # keying on the last allocation keeps the continuation constraint of a
    # revisit identical to the stored visit, so pruning loses nothing
    seen = {}

    def rec(acc, last):
        nonlocal best_cost, best_alloc
        rows = [i for i in range(m) if s[i] > tiny]
        cols = [j for j in range(n) if d[j] > tiny]
        if not rows or not cols:
            if acc < best_cost - eps:
                best_cost = acc
                best_alloc = list(stack_alloc)
            return
        if len(rows) == 1 or len(cols) == 1:
            # a single active line forces every remaining allocation
            if len(rows) == 1:
                i = rows[0]
                tail = [(i, j, d[j]) for j in cols]
            else:
                j = cols[0]
                tail = [(i, j, s[i]) for i in rows]
            total = acc + sum(q * Cl[i][j] for i, j, q in tail)
            if total < best_cost - eps:
                best_cost = total
                best_alloc = list(stack_alloc) + tail
            return
        if len(rows) == 2 or len(cols) == 2:
            # two active lines: exact by greedy exchange (fractional
            # knapsack on the per-unit cost differences)
            if len(rows) == 2:
                a, b = rows
                total = acc + sum(d[j] * Cl[b][j] for j in cols)
                tail = []
                rem = s[a]
                for j in sorted(cols, key=lambda j: Cl[a][j] - Cl[b][j]):
                    q = rem if rem < d[j] else d[j]
                    if q > 0:
                        tail.append((a, j, q))
                        total += q * (Cl[a][j] - Cl[b][j])
                        rem -= q
                    if d[j] - q > tiny:
                        tail.append((b, j, d[j] - q))
            else:
                a, b = cols
                total = acc + sum(s[i] * Cl[i][b] for i in rows)
                tail = []
                rem = d[a]
                for i in sorted(rows, key=lambda i: Cl[i][a] - Cl[i][b]):
                    q = rem if rem < s[i] else s[i]
                    if q > 0:
                        tail.append((i, a, q))
                        total += q * (Cl[i][a] - Cl[i][b])
                        rem -= q
                    if s[i] - q > tiny:
                        tail.append((i, b, s[i] - q))
            if total < best_cost - eps:
                best_cost = total
                best_alloc = list(stack_alloc) + tail
            return
        if acc + lower_bound(rows, cols, s, d) >= best_cost - eps:
            return
        key = (
            tuple(round(x / grid) for x in s)
            + tuple(round(x / grid) for x in d),
            last,
        )
        prev = seen.get(key)
        if prev is not None and acc >= prev - eps:
            return
        seen[key] = acc
        for i, j in cells_by_cost:
            si, dj = s[i], d[j]
            if si <= tiny or dj <= tiny:
                continue
            # allocations on disjoint lines commute, so only the sorted
            # order of each commuting adjacent pair needs exploring
            if last is not None and (i, j) < last and i != last[0] and j != last[1]:
                continue
            q = si if si < dj else dj
            s[i] = si - q
            d[j] = dj - q
            stack_alloc.append((i, j, q))
            rec(acc + q * Cl[i][j], (i, j))
            stack_alloc.pop()
            s[i] = si
            d[j] = dj

    rec(0.0, None)

    pairs = tuple(
        PlanPair(
            mu.positive[i].point,
            mu.negative[j].point,
            q,
            mu.positive[i].tag,
            mu.negative[j].tag,
        )
        for i, j, q in sorted(best_alloc)
        if q > 0
    )
    return best_cost, TransportPlan(pairs, best_cost)


def _point_segment_dist(p, a, b):
    vx, vy = b[0] - a[0], b[1] - a[1]
    wx, wy = p[0] - a[0], p[1] - a[1]
    vv = vx * vx + vy * vy
    t = 0.0 if vv == 0.0 else max(0.0, min(1.0, (wx * vx + wy * vy) / vv))
    return math.hypot(wx - t * vx, wy - t * vy)


def _segments_cross(a0, a1, b0, b1, tol=1e-9):
    """True if the two segments intersect anywhere other than a shared
    endpoint (within ``tol``): proper crossings, interior touches and
    collinear overlaps all count."""
    shared = [
        (p, q)
        for p, q in ((a0, b0), (a0, b1), (a1, b0), (a1, b1))
        if math.hypot(p[0] - q[0], p[1] - q[1]) <= tol
    ]

    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    la = math.hypot(a1[0] - a0[0], a1[1] - a0[1])
    lb = math.hypot(b1[0] - b0[0], b1[1] - b0[1])
    t = tol * max(la, lb, 1e-300)
    collinear = (
        abs(orient(a0, a1, b0)) <= t * la
        and abs(orient(a0, a1, b1)) <= t * la
    )
    if shared:
        if not collinear:
            return False
        # collinear with a shared endpoint: conflict iff they overlap
        ux, uy = (a1[0] - a0[0]) / la, (a1[1] - a0[1]) / la
        ta = sorted([0.0, la])
        tb = sorted(
            [
                (b0[0] - a0[0]) * ux + (b0[1] - a0[1]) * uy,
                (b1[0] - a0[0]) * ux + (b1[1] - a0[1]) * uy,
            ]
        )
        overlap = min(ta[1], tb[1]) - max(ta[0], tb[0])
        return overlap > tol
    if collinear:
        return (
            _point_segment_dist(b0, a0, a1) <= tol
            or _point_segment_dist(b1, a0, a1) <= tol
            or _point_segment_dist(a0, b0, b1) <= tol
        )
    d1 = orient(a0, a1, b0)
    d2 = orient(a0, a1, b1)
    d3 = orient(b0, b1, a0)
    d4 = orient(b0, b1, a1)
    if ((d1 > t and d2 < -t) or (d1 < -t and d2 > t)) and (
        (d3 > t and d4 < -t) or (d3 < -t and d4 > t)
    ):
        return True
    # interior touch: an endpoint of one lies on the other
    for p in (b0, b1):
        if _point_segment_dist(p, a0, a1) <= tol:
            return True
    for p in (a0, a1):
        if _point_segment_dist(p, b0, b1) <= tol:
            return True
    return False


def count_crossings(plan: TransportPlan, tol: float = 1e-9) -> int:
    """Number of interior segment crossings in the plan support."""
    segs = [
        (p.source.xy, p.target.xy) for p in plan.pairs if p.length > tol
    ]
    count = 0
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            if _segments_cross(segs[i][0], segs[i][1], segs[j][0], segs[j][1], tol):
                count += 1
    return count


@dataclass(frozen=True)
class PlanReport:
    max_marginal_residual: float
    crossing_count: int
    pair_count: int


def plan_diagnostics(plan: TransportPlan, mu: BoundaryMeasurePair) -> PlanReport:
    return PlanReport(
        max_marginal_residual=plan.marginal_residual(mu) if plan.pairs else 0.0,
        crossing_count=count_crossings(plan),
        pair_count=len(plan.pairs),
    )


def require_non_crossing(plan: TransportPlan, tol: float = 1e-9):
    c = count_crossings(plan, tol)
    if c:
        raise CrossingSegmentsError(f"{c} interior crossings in plan support")
