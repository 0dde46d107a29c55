import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicsurf.cone import Certification
from bicsurf.generators import (
    InvalidInstanceError,
    cube,
    cylinder_torus,
    flat_torus,
    gen_convex_hull,
    octagon_genus2,
    sphere_icosa,
    triangulated_cone,
)
from bicsurf.surface import (
    CurvatureMeasure,
    TriangulatedSurface,
    certify,
    cone_angles,
    curvature_measure,
    cusp_scan,
    euler_characteristic,
    gauss_bonnet_residual,
    subdivide,
    total_area,
    validate,
)

import oracles

OCTAGON_AREA = 4.8284271247461900976  # 2(1 + sqrt 2), from tests/oracles.py


def test_octagon_area_oracle():
    assert float(oracles.regular_octagon_area(1)) == pytest.approx(OCTAGON_AREA, abs=1e-15)


def test_valid_instances():
    for s in (cube(), flat_torus(), octagon_genus2(), sphere_icosa(), cylinder_torus(), triangulated_cone(3 * math.pi)):
        assert validate(s) == []


def test_length_mismatch_is_reported():
    s = cube()
    L = s.lengths.copy()
    L[0, 0] += 1e-3
    bad = TriangulatedSurface(s.faces, L, s.gluing, 0.0)
    assert "edge-length" in {d.invariant for d in validate(bad)}


def test_infeasible_face():
    s = flat_torus(1, 1)
    bad = TriangulatedSurface(s.faces, np.array([[1, 1, 3]] * 2, dtype=float), s.gluing, 0.0)
    assert "feasibility" in {d.invariant for d in validate(bad)}


def test_broken_gluing():
    s = cube()
    G = s.gluing.copy()
    G[0, 0] = (0, 0)
    assert "gluing" in {d.invariant for d in validate(TriangulatedSurface(s.faces, s.lengths, G, 0.0))}


def test_cone_angles():
    assert all(th == pytest.approx(1.5 * math.pi, abs=1e-12) for th in cone_angles(cube()).values())
    assert all(th == pytest.approx(2 * math.pi, abs=1e-12) for th in cone_angles(flat_torus()).values())
    (th,) = [t for v, t in cone_angles(octagon_genus2()).items() if v == 0]
    assert th == pytest.approx(6 * math.pi, abs=1e-12)


def test_curvature_measures():
    m = curvature_measure(cube())
    assert len(m.atoms) == 8 and m.density == 0
    assert all(a == pytest.approx(math.pi / 2, abs=1e-12) for a in m.atoms.values())
    assert curvature_measure(flat_torus()).atoms == {}
    m = curvature_measure(octagon_genus2())
    assert list(m.atoms) == [0]
    assert m.atoms[0] == pytest.approx(-4 * math.pi, abs=1e-12)


def test_areas():
    assert total_area(cube()) == pytest.approx(6, abs=1e-13)
    assert total_area(flat_torus()) == pytest.approx(1, abs=1e-14)
    assert total_area(sphere_icosa()) == pytest.approx(4 * math.pi, abs=1e-12)
    assert total_area(octagon_genus2()) == pytest.approx(OCTAGON_AREA, abs=1e-13)


@pytest.mark.parametrize(
    "make,chi",
    [(cube, 2), (flat_torus, 0), (octagon_genus2, -2), (sphere_icosa, 2), (cylinder_torus, 0)],
)
def test_gauss_bonnet(make, chi):
    s = make()
    assert euler_characteristic(s) == chi
    assert abs(gauss_bonnet_residual(s)) < 1e-9


def test_cusp_scan():
    assert cusp_scan(cube()) == []
    assert cusp_scan(CurvatureMeasure({3: 2 * math.pi, 4: 1.0}, 0.0)) == [3]


def test_certify_examples():
    assert certify(cube(), 0).status is Certification.BICB
    assert certify(octagon_genus2(), 0).status is Certification.BICA
    assert certify(flat_torus(), 0).status is Certification.BOTH
    res = certify(octagon_genus2(), -1)
    assert res.status is Certification.NEITHER
    assert res.witness["BICA"]["density"] == 0
    assert certify(sphere_icosa(), 1).status is Certification.BOTH


def test_both_only_when_measure_is_exact():
    for s, k in ((cube(), 0), (octagon_genus2(), 0), (sphere_icosa(), 0.5), (flat_torus(), 0.1)):
        assert certify(s, k).status is not Certification.BOTH


@pytest.mark.parametrize("make", [cube, octagon_genus2, sphere_icosa, flat_torus])
def test_subdivision(make):
    s = make()
    t = subdivide(s)
    assert validate(t) == []
    before, after = cone_angles(s), cone_angles(t)
    for v, th in before.items():
        assert after[v] == pytest.approx(th, abs=1e-9)
    for v in set(after) - set(before):
        assert after[v] == pytest.approx(2 * math.pi, abs=1e-9)
    assert total_area(t) == pytest.approx(total_area(s), abs=1e-9)
    k = s.k
    assert certify(t, k).status is certify(s, k).status


def test_relabeling_invariance():
    s = gen_convex_hull(12, 5)
    vmap = {v: 100 + 7 * v for v in s.vertices}
    perm = np.random.default_rng(0).permutation(s.n_faces)
    t = s.relabeled(vmap, perm)
    assert validate(t) == []
    a, b = curvature_measure(s).atoms, curvature_measure(t).atoms
    assert sorted(b) == sorted(vmap[v] for v in a)
    for v, m in a.items():
        assert b[vmap[v]] == pytest.approx(m, abs=1e-14)


def test_hull_point_count_bounds():
    with pytest.raises(InvalidInstanceError):
        gen_convex_hull(3, 0)
    with pytest.raises(InvalidInstanceError):
        gen_convex_hull(201, 0)


@settings(max_examples=25)
@given(st.integers(4, 60), st.integers(0, 10**6))
def test_generated_hulls(n, seed):
    s = gen_convex_hull(n, seed)
    assert validate(s) == []
    assert len(s.vertices) == n
    assert abs(gauss_bonnet_residual(s)) < 1e-9
    assert certify(s, 0).bicb
    assert cusp_scan(s) == []
