import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicsurf.cone import ConeSpec, cone_distance
from bicsurf.exact import ExactDistanceField, UnsupportedModeError, exact_distance
from bicsurf.generators import (
    cone_surface_point,
    cube,
    flat_torus,
    gen_convex_hull,
    octagon_genus2,
    rectangle_torus_point,
    sphere_icosa,
    sphere_point,
    triangulated_cone,
)
from bicsurf.paths import point_on_geodesic
from bicsurf.points import SurfacePoint, layout_of, same_point, uniform_point
from bicsurf.steiner import approx_distance


def test_torus_wraparound():
    s = flat_torus()
    p, q = rectangle_torus_point(s, 0.1, 0.1), rectangle_torus_point(s, 0.9, 0.1)
    d, path = exact_distance(s, p, q)
    assert d == pytest.approx(0.2, abs=1e-12)
    assert path.segment_sum == pytest.approx(d, abs=1e-10)


def test_torus_midpoint():
    s = flat_torus()
    p, q = rectangle_torus_point(s, 0.1, 0.1), rectangle_torus_point(s, 0.9, 0.1)
    d, path = exact_distance(s, p, q)
    L = layout_of(s)
    assert point_on_geodesic(L, path, 0.0) == p
    assert point_on_geodesic(L, path, 1.0) == q
    m = point_on_geodesic(L, path, 0.5)
    assert same_point(L, m, rectangle_torus_point(s, 0.0, 0.1), tol=1e-9)
    assert exact_distance(s, p, m)[0] == pytest.approx(0.1, abs=1e-9)
    assert exact_distance(s, m, q)[0] == pytest.approx(0.1, abs=1e-9)


def test_cone_apex_radial():
    s = triangulated_cone(1.5 * math.pi)
    apex = SurfacePoint(0, (1.0, 0.0, 0.0))
    assert exact_distance(s, apex, cone_surface_point(s, 1.0, 0.4))[0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("theta", [1.5 * math.pi, 3 * math.pi])
def test_cone_agreement(theta):
    s = triangulated_cone(theta)
    c = ConeSpec(0.0, theta)
    rng = np.random.default_rng(1)
    for _ in range(60):
        r1, r2 = rng.uniform(0, 2, 2)
        a1, a2 = rng.uniform(0, theta, 2)
        d = exact_distance(s, cone_surface_point(s, r1, a1), cone_surface_point(s, r2, a2))[0]
        assert d == pytest.approx(cone_distance(c, c.point(r1, a1), c.point(r2, a2)), abs=1e-9)
    d = exact_distance(s, cone_surface_point(s, 1, 0), cone_surface_point(s, 1, 0.75 * math.pi))[0]
    assert d == pytest.approx(cone_distance(c, c.point(1, 0), c.point(1, 0.75 * math.pi)), abs=1e-9)


def test_curved_surface_needs_steiner():
    s = sphere_icosa()
    with pytest.raises(UnsupportedModeError):
        ExactDistanceField(s, SurfacePoint(0, (1 / 3, 1 / 3, 1 / 3)))


def test_steiner_examples():
    s = flat_torus()
    p, q = rectangle_torus_point(s, 0.1, 0.1), rectangle_torus_point(s, 0.9, 0.1)
    assert approx_distance(s, p, p) == 0
    assert approx_distance(s, p, q, refinement=8) == pytest.approx(0.2, abs=1e-3)
    sph = sphere_icosa()
    x = np.array([0.3, 0.5, 0.81])
    a, b = sphere_point(sph, x), sphere_point(sph, -x + np.array([0.01, 0, 0]))
    xa, xb = x / np.linalg.norm(x), (-x + [0.01, 0, 0]) / np.linalg.norm(-x + [0.01, 0, 0])
    truth = math.acos(float(np.clip(xa @ xb, -1, 1)))
    assert approx_distance(sph, a, b, refinement=16) == pytest.approx(truth, abs=2e-2)


def _instances():
    return [flat_torus(), cube(), octagon_genus2(), gen_convex_hull(30, 2), triangulated_cone(3 * math.pi)]


@pytest.mark.parametrize("idx", range(5))
def test_metric_axioms_and_paths(idx):
    s = _instances()[idx]
    rng = np.random.default_rng(idx)
    pts = [uniform_point(s, rng) for _ in range(12)]
    fields = [ExactDistanceField(s, p) for p in pts]
    D = np.array([[f.distance(q) for q in pts] for f in fields])
    assert np.allclose(D, D.T, atol=1e-10, rtol=0)
    assert np.allclose(np.diag(D), 0, atol=1e-12)
    for i in range(12):
        for j in range(12):
            assert np.all(D[i, :] <= D[i, j] + D[j, :] + 1e-9)
    L = layout_of(s)
    for i in range(0, 12, 2):
        path = fields[i].path(pts[i + 1])
        assert path.segment_sum == pytest.approx(D[i, i + 1], abs=1e-10)
        for t in (0.25, 0.5, 0.8):
            m = point_on_geodesic(L, path, t)
            assert fields[i].distance(m) + ExactDistanceField(s, m).distance(pts[i + 1]) == pytest.approx(D[i, i + 1], abs=1e-8)


@pytest.mark.parametrize("make", [cube, octagon_genus2, lambda: gen_convex_hull(20, 7)])
def test_steiner_upper_bound_and_monotone(make):
    s = make()
    rng = np.random.default_rng(0)
    for _ in range(4):
        p, q = uniform_point(s, rng), uniform_point(s, rng)
        exact = exact_distance(s, p, q)[0]
        vals = [approx_distance(s, p, q, refinement=r) for r in (2, 4, 8, 16)]
        assert all(v >= exact - 1e-12 for v in vals)
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
        assert vals[-1] - exact < vals[0] - exact + 1e-12


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_exact_symmetry_hull(seed):
    s = gen_convex_hull(16, seed % 1000)
    rng = np.random.default_rng(seed)
    p, q = uniform_point(s, rng), uniform_point(s, rng)
    assert exact_distance(s, p, q)[0] == pytest.approx(exact_distance(s, q, p)[0], abs=1e-10)
