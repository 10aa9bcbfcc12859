"""Dual certificates for discrete transport plans.

A potential assigns one value per atom so that differences along every
used pair saturate the cost (phi(x) - phi(y) = c(x - y)) while staying
1-Lipschitz between all atoms. The potential is rebuilt from the plan's
support alone, so it certifies optimality independently of the solver.
An infimal-convolution extension provides the 1-Lipschitz field on the
whole plane, and its rotated gradient is the divergence-free dual field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryMeasurePair
from .errors import NotOptimalError
from .fields import GridSpec
from .transport import CostNorm, TransportPlan

LIP_TOL = 1e-9


@dataclass(frozen=True)
class Potential:
    """Values of a 1-Lipschitz potential at every atom location."""

    points: tuple[tuple[float, float], ...]
    values: tuple[float, ...]
    cost: CostNorm

    def value_at(self, xy) -> float:
        key = (xy[0], xy[1])
        try:
            return self.values[self.points.index(key)]
        except ValueError:
            raise KeyError(f"{key} is not an atom location")

    def shifted(self, c: float) -> "Potential":
        return Potential(self.points, tuple(v + c for v in self.values), self.cost)

    def lipschitz_violation(self) -> float:
        """max over atom pairs of |phi(a)-phi(b)| - c(a-b)."""
        worst = -math.inf
        for i in range(len(self.points)):
            ai = self.points[i]
            vi = self.values[i]
            for j in range(i + 1, len(self.points)):
                aj = self.points[j]
                gap = abs(vi - self.values[j]) - self.cost(
                    ai[0] - aj[0], ai[1] - aj[1]
                )
                if gap > worst:
                    worst = gap
        return worst if worst > -math.inf else 0.0

    def saturation_residual(self, plan: TransportPlan) -> float:
        """max over plan pairs of |phi(x) - phi(y) - c(x - y)|."""
        worst = 0.0
        idx = {p: k for k, p in enumerate(self.points)}
        for pair in plan.pairs:
            x, y = pair.source.xy, pair.target.xy
            r = abs(
                self.values[idx[x]]
                - self.values[idx[y]]
                - self.cost(x[0] - y[0], x[1] - y[1])
            )
            worst = max(worst, r)
        return worst


def dual_potentials(
    plan: TransportPlan, mu: BoundaryMeasurePair, cost: CostNorm | None = None
) -> Potential:
    """Potential with phi(x) - phi(y) = c(x - y) on every plan pair.

    Values are propagated along the plan's support graph; disconnected
    components are offset by the midpoint of their feasibility interval
    against already-placed atoms. Raises NotOptimal when no 1-Lipschitz
    assignment exists, i.e. the plan admits no dual certificate.
    """
    cost = cost or CostNorm.euclidean()
    sources = [a.point.xy for a in mu.positive]
    targets = [a.point.xy for a in mu.negative]
    points = []
    seen = set()
    for p in sources + targets:
        if p not in seen:
            seen.add(p)
            points.append(p)
    index = {p: k for k, p in enumerate(points)}

    adj = {k: [] for k in range(len(points))}
    for pair in plan.pairs:
        i = index[pair.source.xy]
        j = index[pair.target.xy]
        c = cost(
            pair.source.xy[0] - pair.target.xy[0],
            pair.source.xy[1] - pair.target.xy[1],
        )
        adj[i].append((j, -c))  # phi(y) = phi(x) - c
        adj[j].append((i, +c))

    values = [None] * len(points)
    components = []
    for root in range(len(points)):
        if values[root] is not None:
            continue
        comp = [root]
        values[root] = 0.0
        stack = [root]
        while stack:
            k = stack.pop()
            for nb, delta in adj[k]:
                v = values[k] + delta
                if values[nb] is None:
                    values[nb] = v
                    comp.append(nb)
                    stack.append(nb)
                elif abs(values[nb] - v) > LIP_TOL:
                    raise NotOptimalError(
                        "plan support forces contradictory potential values"
                    )
        components.append(comp)

    # one offset per component: the 1-Lipschitz constraints between atoms
    # of different components are difference constraints
    #   t_A - t_B <= min over i in A, j in B of (c_ij - v_i + v_j),
    # solved by Bellman-Ford from a virtual source; a negative cycle
    # means no 1-Lipschitz extension exists.
    K = len(components)
    if K > 1:
        comp_of = np.empty(len(points), dtype=int)
        for a, comp in enumerate(components):
            comp_of[comp] = a
        P = np.array(points)
        V = np.array(values)
        C = cost.pairwise(P, P)
        M = C - V[:, None] + V[None, :]
        W = np.full((K, K), math.inf)
        CI = np.broadcast_to(comp_of[:, None], M.shape).ravel()
        CJ = np.broadcast_to(comp_of[None, :], M.shape).ravel()
        np.minimum.at(W, (CI, CJ), M.ravel())
        if np.diag(W).min() < -LIP_TOL:
            raise NotOptimalError(
                "plan support forces contradictory potential values"
            )
        t = np.zeros(K)
        for it in range(K + 1):
            t_new = np.minimum(t, (W + t[None, :]).min(axis=1))
            if np.all(t_new >= t - 1e-15):
                break
            t = t_new
        else:
            # still relaxing after K passes: a cycle of negative total
            # weight exists unless the remaining slack is rounding noise
            if float((t - np.minimum(t, (W + t[None, :]).min(axis=1))).max()) > LIP_TOL:
                raise NotOptimalError(
                    "no 1-Lipschitz potential extends across plan components"
                )
        for k in range(len(points)):
            values[k] += t[comp_of[k]]

    # normalize: phi = 0 at the first source atom
    base = values[index[sources[0]]]
    values = [v - base for v in values]

    phi = Potential(tuple(points), tuple(values), cost)
    if phi.lipschitz_violation() > LIP_TOL:
        raise NotOptimalError("potential violates the 1-Lipschitz constraint")
    return phi


class PotentialField:
    """1-Lipschitz extension by infimal convolution over the atoms:
    phi_hat(z) = min over atoms a of (phi(a) + c(z - a))."""

    def __init__(self, phi: Potential):
        self.phi = phi
        self._pts = np.array(phi.points)
        self._vals = np.array(phi.values)

    def __call__(self, x: float, y: float) -> float:
        c = self.phi.cost
        if c.is_euclidean:
            d = np.hypot(self._pts[:, 0] - x, self._pts[:, 1] - y)
        else:
            d = np.array([c(x - p[0], y - p[1]) for p in self._pts])
        return float((self._vals + d).min())

    def evaluate_grid(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Values on the tensor grid, shape (len(ys), len(xs))."""
        c = self.phi.cost
        X, Y = np.meshgrid(xs, ys)
        if c.is_euclidean:
            out = np.full(X.shape, np.inf)
            # chunk over atoms to bound memory
            for k0 in range(0, len(self._pts), 64):
                P = self._pts[k0 : k0 + 64]
                V = self._vals[k0 : k0 + 64]
                d = np.hypot(
                    X[None, :, :] - P[:, None, None, 0],
                    Y[None, :, :] - P[:, None, None, 1],
                )
                out = np.minimum(out, (V[:, None, None] + d).min(axis=0))
            return out
        out = np.empty(X.shape)
        for iy in range(X.shape[0]):
            for ix in range(X.shape[1]):
                out[iy, ix] = self(X[iy, ix], Y[iy, ix])
        return out


def extend_potential(phi: Potential, cost: CostNorm | None = None) -> PotentialField:
    if cost is not None and cost is not phi.cost:
        phi = Potential(phi.points, phi.values, cost)
    return PotentialField(phi)


@dataclass(frozen=True)
class DualField:
    """Rotated gradient of the extended potential on cell centers."""

    grid: GridSpec
    zx: np.ndarray
    zy: np.ndarray
    max_norm: float
    divergence_residual: float

    def to_csv(self) -> str:
        xs, ys = self.grid.centers()
        lines = ["x,y,zx,zy"]
        for iy in range(self.grid.ny):
            for ix in range(self.grid.nx):
                lines.append(
                    f"{xs[ix]:.12g},{ys[iy]:.12g},"
                    f"{self.zx[iy, ix]:.12g},{self.zy[iy, ix]:.12g}"
                )
        return "\n".join(lines) + "\n"


def dual_field_z(phi_hat: PotentialField, grid: GridSpec) -> DualField:
    """z = (gradient of phi_hat rotated by +90 degrees) per grid cell.

    The gradient uses central differences at cell centers (one-sided at
    the grid edge); the divergence residual is the discrete div(z) over
    interior cells, which vanishes up to differencing error because z is
    a rotated gradient.
    """
    xs, ys = grid.centers()
    F = phi_hat.evaluate_grid(xs, ys)
    h = grid.h
    gx = np.gradient(F, h, axis=1)
    gy = np.gradient(F, h, axis=0)
    zx, zy = -gy, gx
    div = np.zeros_like(F)
    div[1:-1, 1:-1] = (zx[1:-1, 2:] - zx[1:-1, :-2] + zy[2:, 1:-1] - zy[:-2, 1:-1]) / (
        2 * h
    )
    norms = np.hypot(zx, zy)
    return DualField(
        grid,
        zx,
        zy,
        float(norms.max()),
        float(np.abs(div[1:-1, 1:-1]).max()) if F.shape[0] > 2 else 0.0,
    )


@dataclass(frozen=True)
class DualityReport:
    primal_cost: float
    dual_value: float
    gap: float
    saturation_residual: float
    lipschitz_violation: float

    @property
    def certified(self) -> bool:
        tol = 1e-9 * max(1.0, abs(self.primal_cost))
        return (
            self.gap <= tol
            and self.saturation_residual <= 1e-9
            and self.lipschitz_violation <= LIP_TOL
        )


def duality_report(
    plan: TransportPlan, phi: Potential, mu: BoundaryMeasurePair
) -> DualityReport:
    """Strong-duality certificate: primal cost vs integral of phi d(f+ - f-)."""
    idx = {p: k for k, p in enumerate(phi.points)}
    dual = sum(a.mass * phi.values[idx[a.point.xy]] for a in mu.positive) - sum(
        a.mass * phi.values[idx[a.point.xy]] for a in mu.negative
    )
    return DualityReport(
        primal_cost=plan.cost,
        dual_value=dual,
        gap=abs(plan.cost - dual),
        saturation_residual=phi.saturation_residual(plan),
        lipschitz_violation=max(phi.lipschitz_violation(), 0.0),
    )
