import math

import numpy as np
import pytest

from leastgrad import (
    Disc,
    OnJumpSetError,
    assign_face_values,
    build_arrangement,
    discretize,
    evaluate_u,
    solve_kantorovich,
    solve_lgp,
    total_variation_solution,
)
from leastgrad.harness import brothers_g1, brothers_g2, brothers_reference


def test_sharp_reconstruction(sharp_datum, disc):
    res = solve_lgp(disc, sharp_datum, 1)
    sol = res.solution
    assert len(sol.face_values) == 2
    assert evaluate_u(sol, (0.0, 0.5)) == pytest.approx(1.0, abs=1e-12)
    assert evaluate_u(sol, (0.0, -0.5)) == pytest.approx(0.0, abs=1e-12)
    assert total_variation_solution(sol) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(OnJumpSetError):
        evaluate_u(sol, (0.3, 0.0))  # on the diameter chord


def test_face_areas_partition_the_domain(disc):
    res = solve_lgp(disc, brothers_g1(720), n_diffuse=40)
    sub = res.solution.subdivision
    total = sum(sub.face_area(f) for f in sub.faces)
    assert total == pytest.approx(disc.area(), rel=1e-9)


def test_solution_tv_equals_plan_cost(disc):
    # for noncrossing chord plans the reconstruction realizes the cost
    res = solve_lgp(disc, brothers_g1(720), n_diffuse=60)
    assert res.total_variation() == pytest.approx(res.cost, rel=1e-3)


def test_constant_datum(disc):
    from leastgrad import BoundaryBV, Piece

    g = BoundaryBV(disc, [Piece(0.0, disc.boundary_length, value=2.5)])
    res = solve_lgp(disc, g, 10)
    assert res.cost == 0.0
    assert evaluate_u(res.solution, (0.2, -0.3)) == pytest.approx(2.5)


def test_cos2theta_matches_closed_form(disc):
    res = solve_lgp(disc, brothers_g1(720), n_diffuse=90)
    rng = np.random.default_rng(42)
    errs = []
    n = 0
    while n < 2000:
        x, y = rng.uniform(-1, 1, size=2)
        if x * x + y * y >= 0.96:
            continue
        guard = min(
            abs(abs(x) - math.sqrt(2) / 2),
            abs(abs(y) - math.sqrt(2) / 2),
        )
        if guard < 0.03:
            continue
        errs.append(
            abs(res.solution.evaluate_many([x], [y])[0] - brothers_reference("u1", (x, y)))
        )
        n += 1
    assert float(np.mean(errs)) < 0.05


def test_enclosed_face_median_value():
    # four unit-mass chords forming the inscribed square: the enclosed
    # central face touches no boundary arc and takes the midpoint of the
    # weighted-median interval of its neighbors' values (+1/-1 twice
    # each with equal chord lengths), i.e. 0 with feasible range [-1, 1]
    from leastgrad import BoundaryBV
    from leastgrad.transport import PlanPair, TransportPlan

    d = Disc()
    q = math.pi / 4
    g = BoundaryBV.piecewise_constant(
        d, [q, 3 * q, 5 * q, 7 * q], [-1.0, 1.0, -1.0, 1.0]
    )
    pts = {k: d.boundary_param(k * q) for k in (1, 3, 5, 7)}
    pairs = [
        PlanPair(pts[3], pts[1], 1.0, "atomic", "atomic"),
        PlanPair(pts[3], pts[5], 1.0, "atomic", "atomic"),
        PlanPair(pts[7], pts[5], 1.0, "atomic", "atomic"),
        PlanPair(pts[7], pts[1], 1.0, "atomic", "atomic"),
    ]
    plan = TransportPlan(tuple(pairs), 4 * math.sqrt(2))
    sub = build_arrangement(plan, d)
    sol = assign_face_values(sub, g, plan)
    enclosed = [fv for fv in sol.face_values if fv.enclosed]
    assert len(enclosed) == 1
    assert enclosed[0].value == pytest.approx(0.0, abs=1e-12)
    lo, hi = enclosed[0].feasible
    assert lo == pytest.approx(-1.0, abs=1e-12)
    assert hi == pytest.approx(1.0, abs=1e-12)
    assert sol.total_variation() == pytest.approx(4 * math.sqrt(2), rel=1e-12)


def test_locate_many_matches_locate(disc, sharp_datum):
    res = solve_lgp(disc, sharp_datum, 1)
    sub = res.solution.subdivision
    rng = np.random.default_rng(9)
    pts = rng.uniform(-0.7, 0.7, size=(200, 2))
    idx = sub.locate_many(pts[:, 0], pts[:, 1])
    for (x, y), k in zip(pts, idx):
        if abs(y) < 1e-6:
            continue
        assert sub.locate(x, y).index == k


def test_solution_json(disc, sharp_datum):
    res = solve_lgp(disc, sharp_datum, 1)
    js = res.solution.to_json()
    assert set(js) == {"chords", "faces"}
    assert len(js["faces"]) == 2
    assert {round(f["value"], 9) for f in js["faces"]} == {0.0, 1.0}
