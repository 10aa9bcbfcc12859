"""End-to-end solve: boundary datum -> transport plan -> planar solution.

The pipeline refuses reconstruction when the optimal plan carries mass on
the boundary itself (possible only on polygons): no function attains the
trace in that case, so there is no minimizer to rebuild.
"""

from __future__ import annotations

from dataclasses import dataclass

from .boundary import BoundaryBV, BoundaryMeasurePair, discretize
from .errors import ZeroMeasureError
from .fields import boundary_mass
from .geometry import ConvexDomain
from .reconstruct import PlanarSolution, assign_face_values, build_arrangement
from .transport import CostNorm, TransportPlan, solve_kantorovich

BOUNDARY_MASS_TOL = 1e-9


@dataclass(frozen=True)
class SolveResult:
    domain: ConvexDomain
    g: BoundaryBV
    mu: BoundaryMeasurePair | None
    plan: TransportPlan
    boundary_mass: float
    exists: bool
    solution: PlanarSolution | None

    @property
    def cost(self) -> float:
        return self.plan.cost

    def total_variation(self) -> float:
        if self.solution is None:
            raise ValueError("no solution was reconstructed")
        return self.solution.total_variation()


def solve_lgp(
    domain: ConvexDomain,
    g: BoundaryBV,
    n_diffuse: int = 180,
    cost: CostNorm | None = None,
    reconstruct: bool = True,
) -> SolveResult:
    """Solve the minimal-total-variation problem for datum ``g``.

    ``n_diffuse`` controls the quantization of the smooth part of the
    datum's tangential derivative (cells per sign-constant run).
    """
    f = g.tangential_derivative()
    try:
        mu = discretize(f, n_diffuse)
    except ZeroMeasureError:
        # constant datum: the solution is the constant itself
        plan = TransportPlan((), 0.0)
        sol = None
        if reconstruct:
            sub = build_arrangement(plan, domain)
            sol = assign_face_values(sub, g, plan)
        return SolveResult(domain, g, None, plan, 0.0, True, sol)

    plan = solve_kantorovich(mu, cost)
    b_mass = boundary_mass(plan, domain)
    if b_mass > BOUNDARY_MASS_TOL * max(1.0, plan.cost):
        return SolveResult(domain, g, mu, plan, b_mass, False, None)
    sol = None
    if reconstruct:
        sub = build_arrangement(plan, domain)
        sol = assign_face_values(sub, g, plan)
    return SolveResult(domain, g, mu, plan, b_mass, True, sol)
