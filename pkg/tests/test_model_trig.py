import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from bicsurf.model_trig import (
    ModelTriangleError,
    model_angle,
    model_angle_array,
    model_angles,
    model_area,
    model_diameter,
    model_side,
    relative_excess,
    triangle_exists,
)

# mpmath values from tests/oracles.py
HYPERBOLIC_EQUILATERAL_1 = 0.9187978721780273690
SPHERICAL_1_12_09 = 1.1246069519101604232
HYPERBOLIC_1_12_09 = 0.8247102091667906030


def test_frozen_values_match_oracle():
    import oracles

    assert float(oracles.hyperbolic_equilateral_angle(1)) == pytest.approx(HYPERBOLIC_EQUILATERAL_1, abs=1e-15)
    assert float(oracles.spherical_angle(1, 1.2, 0.9)) == pytest.approx(SPHERICAL_1_12_09, abs=1e-15)
    assert float(oracles.hyperbolic_angle(1, 1.2, 0.9)) == pytest.approx(HYPERBOLIC_1_12_09, abs=1e-15)


@pytest.mark.parametrize("kappa,expected", [(1, math.pi), (4, math.pi / 2), (-1, math.inf), (0, math.inf)])
def test_diameter(kappa, expected):
    assert model_diameter(kappa) == expected


@pytest.mark.parametrize(
    "kappa,sides,ok",
    [(0, (1, 1, 1), True), (1, (3, 3, 3), False), (0, (1, 1, 3), False), (0, (1, 1, 2), True)],
)
def test_triangle_exists(kappa, sides, ok):
    assert triangle_exists(kappa, sides) is ok


def test_angles_known():
    assert model_angle(0, (1, 1, 1)) == pytest.approx(math.pi / 3, abs=1e-15)
    h = math.pi / 2
    assert model_angle(1, (h, h, h)) == pytest.approx(math.pi / 2, abs=1e-12)
    assert model_angle(-1, (1, 1, 1)) == pytest.approx(HYPERBOLIC_EQUILATERAL_1, abs=1e-13)
    assert model_angle(1, (1, 1.2, 0.9)) == pytest.approx(SPHERICAL_1_12_09, abs=1e-13)
    assert model_angle(-1, (1, 1.2, 0.9)) == pytest.approx(HYPERBOLIC_1_12_09, abs=1e-13)


def test_scaled_curvature():
    # M^2(4) is the unit sphere scaled by 1/2
    assert model_angle(4, (0.5, 0.6, 0.45)) == pytest.approx(SPHERICAL_1_12_09, abs=1e-13)


def test_sides_known():
    assert model_side(0, 3, 4, math.pi / 2) == pytest.approx(5, abs=1e-15)
    for k in (-2.0, 0.0, 0.7):
        assert model_side(k, 1.3, 0.4, 0.0) == pytest.approx(0.9, abs=1e-12)
    assert model_side(0, 1.3, 0.4, math.pi) == pytest.approx(1.7, abs=1e-15)


def test_areas_known():
    h = math.pi / 2
    assert model_area(1, (h, h, h)) == pytest.approx(math.pi / 2, abs=1e-12)
    assert model_area(1, (h, h, h)) == pytest.approx(4 * math.pi / 8, abs=1e-12)
    assert model_area(0, (3, 4, 5)) == pytest.approx(6, abs=1e-14)
    assert model_area(-1e-8, (3, 4, 5)) == pytest.approx(6, rel=1e-6)


def test_relative_excess_examples():
    s = (0.8, 1.1, 0.7)
    for k in (-1.0, 0.0, 1.0):
        assert relative_excess(k, model_angles(k, s), s) == pytest.approx(0, abs=1e-12)
    assert relative_excess(0, (math.pi,) * 3, (1, 1, 1)) == pytest.approx(2 * math.pi, abs=1e-14)


def test_errors():
    with pytest.raises(ModelTriangleError):
        model_angle(0, (1, 1, 3))
    with pytest.raises(ModelTriangleError):
        model_angle(1, (3, 3, 3))
    with pytest.raises(ModelTriangleError):
        model_side(1, 4.0, 1.0, 0.5)
    with pytest.raises(ModelTriangleError):
        model_side(0, 1.0, 1.0, 4.0)


def test_clamping_tolerance():
    # roundoff-size violations are clamped, bigger ones rejected
    assert model_angle(0, (2 + 1e-12, 1, 1)) == pytest.approx(math.pi)
    with pytest.raises(ModelTriangleError):
        model_angle(0, (2 + 1e-6, 1, 1))


def test_degenerate():
    assert model_angle(0, (2, 1, 1)) == pytest.approx(math.pi, abs=1e-15)
    assert model_angle(0, (0, 1, 1)) == 0.0
    assert model_angle(1, (0.5, 1.0, 0.5)) == pytest.approx(0.0, abs=1e-7)
    assert model_angle(-1, (1.5, 1.0, 0.5)) == pytest.approx(math.pi, abs=1e-7)


sides = st.floats(0.1, 10.0)
kappas = st.sampled_from([-4.0, -1.0, -0.1, 0.0, 0.1, 1.0, 4.0])


@given(kappas, sides, sides, st.floats(0.0, math.pi))
def test_round_trip(kappa, b, c, alpha):
    if kappa > 0:
        D = model_diameter(kappa)
        b, c = b % (0.95 * D) + 1e-3, c % (0.95 * D) + 1e-3
    a = model_side(kappa, b, c, alpha)
    assume(a > 1e-6)
    assume(kappa <= 0 or a + b + c < 2 * model_diameter(kappa) * (1 - 1e-9))
    assert model_angle(kappa, (a, b, c)) == pytest.approx(alpha, abs=1e-9)


def _feasible(a, b, c):
    return a < b + c and b < a + c and c < a + b


@given(sides, sides, sides)
def test_monotone_in_kappa(a, b, c):
    assume(_feasible(a, b, c) and min(b + c - a, a + c - b, a + b - c) > 1e-3)
    grid = [-2.0, -0.5, 0.0, 0.5 * (2 * math.pi / (a + b + c)) ** 2 * 0.9]
    vals = [model_angle(k, (a, b, c)) for k in grid]
    assert all(v1 <= v2 + 1e-12 for v1, v2 in zip(vals, vals[1:]))


@given(st.sampled_from([-1.0, -0.3, 0.3, 1.0]), sides, sides, sides)
def test_model_gauss_bonnet(kappa, a, b, c):
    assume(_feasible(a, b, c) and min(b + c - a, a + c - b, a + b - c) > 1e-4)
    assume(kappa < 0 or a + b + c < 1.9 * model_diameter(kappa))
    angle_sum = math.fsum(model_angles(kappa, (a, b, c)))
    assert angle_sum - math.pi == pytest.approx(kappa * model_area(kappa, (a, b, c)), abs=1e-9)


@given(sides, sides, sides)
def test_continuity_at_zero(a, b, c):
    assume(_feasible(a, b, c))
    for k in (1e-8, -1e-8):
        assert abs(model_angle(k, (a, b, c)) - model_angle(0, (a, b, c))) <= 1e-6


@given(kappas, sides, sides)
def test_degenerate_stable(kappa, b, c):
    if kappa > 0:
        D = model_diameter(kappa)
        b, c = b % (0.45 * D) + 1e-3, c % (0.45 * D) + 1e-3
    assert model_angle(kappa, (b + c, b, c)) == pytest.approx(math.pi, abs=1e-6)
    assert model_angle(kappa, (abs(b - c), b, c)) == pytest.approx(0.0, abs=1e-6)


@given(kappas, st.lists(st.tuples(sides, sides, sides), min_size=1, max_size=30))
def test_vectorized_matches_scalar(kappa, triples):
    a, b, c = (np.array(x) for x in zip(*triples))
    out = model_angle_array(kappa, a, b, c)
    for i, (x, y, z) in enumerate(triples):
        try:
            ref = model_angle(kappa, (x, y, z))
        except ModelTriangleError:
            assert np.isnan(out[i])
            continue
        assert out[i] == pytest.approx(ref, abs=1e-12)
