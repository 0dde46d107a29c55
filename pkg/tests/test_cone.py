import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bicsurf.cone import (
    Certification,
    ConePoint,
    ConeSpec,
    circle_left_turn,
    cone_certify,
    cone_curvature_atom,
    cone_distance,
    cone_interpolate,
)
from bicsurf.generators import cone_surface_point, triangulated_cone
from bicsurf.model_trig import model_side
from bicsurf.steiner import approx_distance


def test_full_angle_is_model_plane():
    for k in (-1.0, 0.0, 1.0):
        c = ConeSpec(k, 2 * math.pi)
        assert cone_distance(c, c.point(0.3, 1.0), c.point(1.1, 1.0)) == pytest.approx(0.8, abs=1e-12)
        assert cone_distance(c, c.point(0.3, 0.2), c.point(1.1, 1.4)) == pytest.approx(model_side(k, 0.3, 1.1, 1.2), abs=1e-14)


def test_half_plane_cone():
    c = ConeSpec(0.0, math.pi)
    assert cone_distance(c, c.point(1, 0), c.point(1, math.pi / 2)) == pytest.approx(math.sqrt(2), abs=1e-14)


def test_through_apex():
    c = ConeSpec(0.0, 3 * math.pi)
    assert cone_distance(c, c.point(1, 0), c.point(1, 1.4 * math.pi)) == 2.0


def test_through_apex_against_triangulation():
    # dense Steiner graph on a triangulated copy, refined until it settles
    s = triangulated_cone(3 * math.pi, n=12)
    p, q = cone_surface_point(s, 1, 0.0), cone_surface_point(s, 1, 1.4 * math.pi)
    prev = None
    for r in (8, 16, 32):
        d = approx_distance(s, p, q, refinement=r)
        if prev is not None and abs(prev - d) < 1e-4:
            break
        prev = d
    assert d == pytest.approx(2.0, abs=2e-3)
    assert d >= 2.0 - 1e-12


def test_atom():
    assert cone_curvature_atom(ConeSpec(0, 2 * math.pi)) == 0
    assert cone_curvature_atom(ConeSpec(0, 1.5 * math.pi)) == pytest.approx(math.pi / 2)


@pytest.mark.parametrize("theta", [math.pi, 1.5 * math.pi, 2 * math.pi, 3 * math.pi])
def test_circle_turn_plus_atom(theta):
    c = ConeSpec(0.0, theta)
    # polygon turn sums converge to theta as the polygon refines
    turn = circle_left_turn(c, 0.7, n=512)
    assert turn == pytest.approx(theta, abs=1e-9)
    assert turn + cone_curvature_atom(c) == pytest.approx(2 * math.pi, abs=1e-9)


@pytest.mark.parametrize(
    "kappa,theta,bound,expected",
    [
        (0, 1.5 * math.pi, 0, Certification.BICB),
        (-1, 3 * math.pi, -1, Certification.BICA),
        (0, 2 * math.pi, 0, Certification.BOTH),
        (0, 3 * math.pi, -1, Certification.NEITHER),
    ],
)
def test_certify(kappa, theta, bound, expected):
    assert cone_certify(ConeSpec(kappa, theta), bound) is expected


def test_invalid():
    with pytest.raises(ValueError):
        ConeSpec(0, 0)
    with pytest.raises(ValueError):
        ConeSpec(math.nan, 1)
    c = ConeSpec(1, math.pi)
    with pytest.raises(ValueError):
        cone_distance(c, c.point(2.0, 0), c.point(0.1, 0))
    with pytest.raises(ValueError):
        cone_distance(c, ConePoint(0.1, 4.0), c.point(0.1, 0))


def test_angle_normalized():
    c = ConeSpec(0, 1.5 * math.pi)
    assert c.point(1, -0.25).phi == pytest.approx(1.5 * math.pi - 0.25)
    assert c.point(1, 1.5 * math.pi).phi == 0.0


cones = st.sampled_from([ConeSpec(0, 1.5 * math.pi), ConeSpec(1, 1.5 * math.pi), ConeSpec(-1, 3 * math.pi), ConeSpec(0, 4 * math.pi)])


def _points(c, rng, n):
    rmax = 0.95 * c.max_radius if c.kappa > 0 else 2.0
    return [c.point(rmax * rng.random(), c.theta * rng.random()) for _ in range(n)]


@given(cones, st.integers(0, 2**31))
def test_metric_axioms(c, seed):
    rng = np.random.default_rng(seed)
    pts = _points(c, rng, 30)
    for _ in range(300):
        i, j, k = rng.integers(0, 30, 3)
        a, b, e = pts[i], pts[j], pts[k]
        assert cone_distance(c, a, b) == cone_distance(c, b, a)
        assert cone_distance(c, a, e) <= cone_distance(c, a, b) + cone_distance(c, b, e) + 1e-12
    assert cone_distance(c, pts[0], pts[0]) == pytest.approx(0, abs=1e-7)


@given(cones, st.integers(0, 2**31), st.floats(0, 1))
def test_interpolation_splits_distance(c, seed, t):
    rng = np.random.default_rng(seed)
    p, q = _points(c, rng, 2)
    m = cone_interpolate(c, p, q, t)
    d = cone_distance(c, p, q)
    assert cone_distance(c, p, m) + cone_distance(c, m, q) == pytest.approx(d, abs=1e-8)
    assert cone_distance(c, p, m) == pytest.approx(t * d, abs=1e-8)
