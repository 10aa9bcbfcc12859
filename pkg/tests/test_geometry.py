import math

import numpy as np
import pytest

from leastgrad import (
    ConvexPolygon,
    Disc,
    InteriorPointError,
    domain_from_json,
    hausdorff_boundary_distance,
)


def test_disc_param_roundtrip():
    d = Disc((0.5, -0.25), 2.0)
    for s in np.linspace(0.0, d.boundary_length, 37, endpoint=False):
        bp = d.boundary_param(s)
        assert d.arc_coordinate(bp.xy) == pytest.approx(s, abs=1e-12)
        assert math.hypot(bp.xy[0] - 0.5, bp.xy[1] + 0.25) == pytest.approx(2.0)
        # tangent is unit and perpendicular to the radius
        tx, ty = bp.tangent
        assert math.hypot(tx, ty) == pytest.approx(1.0)
        rx, ry = bp.xy[0] - 0.5, bp.xy[1] + 0.25
        assert abs(tx * rx + ty * ry) < 1e-12


def test_disc_metrics():
    d = Disc(radius=3.0)
    assert d.boundary_length == pytest.approx(6 * math.pi)
    assert d.area() == pytest.approx(9 * math.pi)
    assert d.diameter() == pytest.approx(6.0)


def test_polygon_param_and_area():
    sq = ConvexPolygon([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    assert sq.boundary_length == pytest.approx(8.0)
    assert sq.area() == pytest.approx(4.0)
    assert sq.diameter() == pytest.approx(2 * math.sqrt(2))
    # midpoints of the four edges, counterclockwise from vertex 0
    assert sq.boundary_param(1.0).xy == pytest.approx((0.0, -1.0))
    assert sq.boundary_param(3.0).xy == pytest.approx((1.0, 0.0))
    assert sq.boundary_param(5.0).xy == pytest.approx((0.0, 1.0))
    assert sq.boundary_param(7.0).xy == pytest.approx((-1.0, 0.0))
    for s in np.linspace(0.0, 8.0, 29, endpoint=False):
        assert sq.arc_coordinate(sq.boundary_param(s).xy) == pytest.approx(
            s, abs=1e-9
        )


def test_polygon_validation():
    with pytest.raises(ValueError):
        ConvexPolygon([(0, 0), (1, 0)])  # too few vertices
    with pytest.raises(ValueError):
        ConvexPolygon([(0, 0), (0, 1), (1, 0)])  # clockwise
    with pytest.raises(ValueError):
        # reflex vertex
        ConvexPolygon([(0, 0), (2, 0), (1, 0.1), (2, 2), (0, 2)])


def test_projection_and_containment():
    d = Disc()
    p = d.project_to_boundary((2.0, 0.0))
    assert p.xy == pytest.approx((1.0, 0.0))
    with pytest.raises(InteriorPointError):
        d.project_to_boundary((0.1, 0.0))
    assert d.contains((0.5, 0.5))
    assert not d.contains((0.9, 0.9))

    sq = ConvexPolygon([(0, 0), (2, 0), (2, 2), (0, 2)])
    q = sq.project_to_boundary((3.0, 1.0))
    assert q.xy == pytest.approx((2.0, 1.0))
    with pytest.raises(InteriorPointError):
        sq.project_to_boundary((1.0, 1.0))


def test_json_roundtrip():
    for dom in (Disc((0.1, 0.2), 1.5), ConvexPolygon([(0, 0), (1, 0), (0.5, 1)])):
        again = domain_from_json(dom.to_json())
        assert again.to_json() == dom.to_json()
    with pytest.raises(ValueError):
        domain_from_json({"kind": "ellipse"})


def test_hausdorff_distance_disc_vs_inscribed_square():
    # square with vertices on the unit circle: both one-sided distances are
    # attained at edge midpoints, giving 1 - sqrt(2)/2
    d = Disc()
    sq = ConvexPolygon([(1, 0), (0, 1), (-1, 0), (0, -1)])
    expected = 1.0 - math.sqrt(2) / 2
    assert hausdorff_boundary_distance(d, sq) == pytest.approx(expected, abs=1e-3)


def test_hausdorff_distance_scaled_discs():
    assert hausdorff_boundary_distance(Disc(), Disc(radius=1.2)) == pytest.approx(
        0.2, abs=1e-6
    )
