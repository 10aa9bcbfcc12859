import math

import numpy as np
import pytest
from scipy.optimize import linprog

from leastgrad import (
    BoundaryMeasurePair,
    CostNorm,
    CrossingSegmentsError,
    Disc,
    MassAtom,
    TooLargeError,
    UnbalancedError,
    brute_force_oracle,
    count_crossings,
    plan_diagnostics,
    require_non_crossing,
    solve_kantorovich,
)
from conftest import random_atom_pair


def lp_oracle(mu: BoundaryMeasurePair, cost=None) -> float:
    """Independent LP oracle via scipy's HiGHS solver."""
    cost = cost or CostNorm.euclidean()
    X = np.array([a.point.xy for a in mu.positive])
    Y = np.array([a.point.xy for a in mu.negative])
    C = cost.pairwise(X, Y)
    m, n = C.shape
    s = np.array([a.mass for a in mu.positive])
    d = np.array([a.mass for a in mu.negative])
    d[-1] += s.sum() - d.sum()
    A_eq = []
    for i in range(m):
        row = np.zeros(m * n)
        row[i * n : (i + 1) * n] = 1.0
        A_eq.append(row)
    for j in range(n):
        row = np.zeros(m * n)
        row[j::n] = 1.0
        A_eq.append(row)
    res = linprog(
        C.ravel(), A_eq=np.array(A_eq), b_eq=np.concatenate([s, d]), method="highs"
    )
    assert res.success
    return float(res.fun)


def test_cost_norm_axioms():
    CostNorm.euclidean().check_axioms()
    assert CostNorm.euclidean()(3.0, 4.0) == pytest.approx(5.0)


def test_single_pair():
    d = Disc()
    mu = BoundaryMeasurePair(
        (MassAtom(d.boundary_param(0.0), 2.0, "atomic"),),
        (MassAtom(d.boundary_param(math.pi), 2.0, "atomic"),),
    )
    plan = solve_kantorovich(mu)
    assert plan.cost == pytest.approx(4.0, abs=1e-12)  # mass 2 across diameter 2
    assert len(plan.pairs) == 1
    assert plan.marginal_residual(mu) < 1e-12


def test_one_source_two_targets_enumeration_oracle():
    # single source splitting onto two targets: cost is forced, check exactly
    d = Disc()
    s0, t1, t2 = 1.0, 2.5, 5.0
    mu = BoundaryMeasurePair(
        (MassAtom(d.boundary_param(s0), 1.0, "atomic"),),
        (
            MassAtom(d.boundary_param(t1), 0.4, "atomic"),
            MassAtom(d.boundary_param(t2), 0.6, "atomic"),
        ),
    )
    c = CostNorm.euclidean()

    def dist(a, b):
        pa, pb = d.boundary_param(a).xy, d.boundary_param(b).xy
        return c(pa[0] - pb[0], pa[1] - pb[1])

    expected = 0.4 * dist(s0, t1) + 0.6 * dist(s0, t2)
    plan = solve_kantorovich(mu)
    assert plan.cost == pytest.approx(expected, abs=1e-12)
    assert plan.cost == pytest.approx(brute_force_oracle(mu)[0], abs=1e-12)


def test_unbalanced_rejected():
    d = Disc()
    mu = BoundaryMeasurePair(
        (MassAtom(d.boundary_param(0.0), 1.0, "atomic"),),
        (MassAtom(d.boundary_param(3.0), 2.0, "atomic"),),
    )
    with pytest.raises(UnbalancedError):
        solve_kantorovich(mu)


def test_oracle_size_guard():
    rng = np.random.default_rng(5)
    mu = random_atom_pair(rng, 7, 3)
    with pytest.raises(TooLargeError):
        brute_force_oracle(mu)


def test_simplex_matches_lp_oracle_medium():
    rng = np.random.default_rng(11)
    for _ in range(20):
        m, n = rng.integers(5, 16, size=2)
        mu = random_atom_pair(rng, int(m), int(n))
        plan = solve_kantorovich(mu)
        assert plan.cost == pytest.approx(lp_oracle(mu), abs=1e-9)
        assert plan.marginal_residual(mu) < 1e-9
        assert len(plan.pairs) <= m + n - 1  # basic solution


def test_degenerate_masses():
    # equal masses force degenerate pivots; optimum is the identity matching
    d = Disc()
    ss = [0.0, 1.0, 2.0, 3.5, 4.5, 5.5]
    mu = BoundaryMeasurePair(
        tuple(MassAtom(d.boundary_param(s), 1.0, "atomic") for s in ss[:3]),
        tuple(MassAtom(d.boundary_param(s), 1.0, "atomic") for s in ss[3:]),
    )
    plan = solve_kantorovich(mu)
    assert plan.cost == pytest.approx(lp_oracle(mu), abs=1e-12)
    assert count_crossings(plan) == 0


def test_optimal_plans_do_not_cross():
    rng = np.random.default_rng(23)
    for _ in range(40):
        m, n = rng.integers(2, 9, size=2)
        mu = random_atom_pair(rng, int(m), int(n))
        plan = solve_kantorovich(mu)
        require_non_crossing(plan)
        rep = plan_diagnostics(plan, mu)
        assert rep.crossing_count == 0
        assert rep.max_marginal_residual < 1e-9


def test_crossing_detection():
    # swap the targets of an optimal plan: the segments must cross
    d = Disc()
    mu = BoundaryMeasurePair(
        (
            MassAtom(d.boundary_param(0.0), 1.0, "atomic"),
            MassAtom(d.boundary_param(1.0), 1.0, "atomic"),
        ),
        (
            MassAtom(d.boundary_param(3.0), 1.0, "atomic"),
            MassAtom(d.boundary_param(4.0), 1.0, "atomic"),
        ),
    )
    plan = solve_kantorovich(mu)
    assert count_crossings(plan) == 0
    from leastgrad.transport import PlanPair, TransportPlan

    a, b = plan.pairs
    swapped = TransportPlan(
        (
            PlanPair(a.source, b.target, a.mass, "atomic", "atomic"),
            PlanPair(b.source, a.target, b.mass, "atomic", "atomic"),
        ),
        0.0,
    )
    assert count_crossings(swapped) == 1
    with pytest.raises(CrossingSegmentsError):
        require_non_crossing(swapped)


def test_plan_json(sharp_datum):
    from leastgrad import discretize

    mu = discretize(sharp_datum.tangential_derivative(), 1)
    plan = solve_kantorovich(mu)
    js = plan.to_json()
    assert set(js) == {"pairs", "cost"}
    assert all(
        set(p) == {"src", "dst", "mass", "src_tag", "dst_tag"} for p in js["pairs"]
    )
    assert js["cost"] == pytest.approx(plan.cost)
