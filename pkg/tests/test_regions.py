import math

import numpy as np
import pytest

from bicsurf.generators import cube, flat_torus, gen_convex_hull, octagon_genus2, rectangle_torus_point, sphere_icosa
from bicsurf.model_trig import model_area
from bicsurf.oracles import SurfaceOracle
from bicsurf.points import SurfacePoint, layout_of, polar_point, uniform_point
from bicsurf.regions import OverlapError, RegionError, area_distortion_check, excess_estimate, triangle_region


def _corner(s, v):
    return s.corners_of[v][0]


def _around(s, v, r, angles):
    L = layout_of(s)
    f, i = _corner(s, v)
    return [polar_point(L, f, i, r, a) for a in angles]


def test_flat_triangle():
    s = flat_torus()
    o = SurfaceOracle(s)
    p, q, r = (rectangle_torus_point(s, x, y) for x, y in ((0.1, 0.1), (0.4, 0.2), (0.25, 0.45)))
    reg = triangle_region(o, p, q, r)
    heron = model_area(0, reg.side_lengths)
    assert reg.area == pytest.approx(heron, abs=1e-12)
    assert reg.atoms == {}
    res = area_distortion_check(o, p, q, r)
    assert res.lower_residual == pytest.approx(0, abs=1e-12)
    assert res.upper_residual == pytest.approx(0, abs=1e-12)


def test_cube_corner_region():
    s = cube()
    o = SurfaceOracle(s)
    r = 0.3
    tri = _around(s, 0, r, (0.0, 0.5 * math.pi, math.pi))
    reg = triangle_region(o, *tri)
    # three right isosceles triangles fanned around the corner
    assert reg.area == pytest.approx(1.5 * r * r, abs=1e-12)
    assert list(reg.atoms) == [0]
    assert reg.positive_mass == pytest.approx(math.pi / 2)
    res = area_distortion_check(o, *tri)
    assert res.model_area == pytest.approx(math.sqrt(3) / 4 * 2 * r * r, abs=1e-12)
    assert res.area - res.model_area <= 0.5 * (math.pi / 2) * res.diameter_bound**2
    assert res.upper_residual >= 0 and res.lower_residual >= 0


def test_octagon_vertex_tree():
    # three points around the 6*pi vertex, pairwise 2*pi apart: all sides run through the vertex
    s = octagon_genus2()
    o = SurfaceOracle(s)
    tri = _around(s, 0, 0.1, (0.0, 2 * math.pi, 4 * math.pi))
    reg = triangle_region(o, *tri)
    assert reg.area == 0.0
    assert reg.negative_mass == pytest.approx(4 * math.pi)
    res = area_distortion_check(o, *tri)
    assert res.area - res.model_area >= -0.5 * 4 * math.pi * res.diameter_bound**2
    assert res.lower_residual >= 0


def test_noncontractible_rejected():
    # a triangle whose sides go once around the torus does not bound a disc
    s = flat_torus()
    o = SurfaceOracle(s)
    p, q, r = (rectangle_torus_point(s, x, 0.5) for x in (0.0, 1 / 3, 2 / 3))
    with pytest.raises(RegionError):
        triangle_region(o, p, q, r)


def test_curved_rejected():
    s = sphere_icosa()
    o = SurfaceOracle(s)
    p = SurfacePoint(0, (0.2, 0.3, 0.5))
    with pytest.raises((RegionError, ValueError)):
        triangle_region(o, p, p, p)


@pytest.mark.parametrize("make", [cube, octagon_genus2, lambda: gen_convex_hull(25, 3)])
def test_random_triangles(make):
    s = make()
    o = SurfaceOracle(s)
    rng = np.random.default_rng(7)
    for _ in range(30):
        # small triangles bound discs even on the genus-2 surface
        tri = o.sample_ball(rng, uniform_point(s, rng), 0.3, 3)
        res = area_distortion_check(o, *tri)
        assert res.lower_residual >= -1e-6
        assert res.upper_residual >= -1e-6


def test_excess_estimate_empty():
    assert excess_estimate(SurfaceOracle(cube()), []) == 0.0


@pytest.mark.parametrize("r", [0.2, 0.05, 0.01])
def test_excess_estimate_cube_corner(r):
    s = cube()
    o = SurfaceOracle(s)
    tri = _around(s, 0, r, (0.0, 0.5 * math.pi, math.pi))
    centre = o.special_points()[0]
    val = excess_estimate(o, [tri], centre=centre, radius=2 * r)
    assert val == pytest.approx(math.pi / 2, rel=0.05)


def test_excess_estimate_flat_torus():
    s = flat_torus()
    o = SurfaceOracle(s)
    a = [rectangle_torus_point(s, x, y) for x, y in ((0.1, 0.1), (0.4, 0.1), (0.2, 0.4))]
    b = [rectangle_torus_point(s, x, y) for x, y in ((0.6, 0.6), (0.9, 0.65), (0.7, 0.9))]
    assert excess_estimate(o, [a, b]) == pytest.approx(0, abs=2e-3)


def test_overlap_detected():
    s = flat_torus()
    o = SurfaceOracle(s)
    a = [rectangle_torus_point(s, x, y) for x, y in ((0.1, 0.1), (0.4, 0.1), (0.2, 0.4))]
    b = [rectangle_torus_point(s, x, y) for x, y in ((0.2, 0.15), (0.5, 0.2), (0.3, 0.5))]
    with pytest.raises(OverlapError):
        excess_estimate(o, [a, b])


def test_family_must_stay_in_region():
    s = cube()
    o = SurfaceOracle(s)
    tri = _around(s, 0, 0.2, (0.0, 0.5 * math.pi, math.pi))
    with pytest.raises(ValueError):
        excess_estimate(o, [tri], centre=o.special_points()[0], radius=0.1)
