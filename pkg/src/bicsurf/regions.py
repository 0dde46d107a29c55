"""Regions bounded by geodesic triangles on flat triangulated surfaces.

Each face is cut by the path segments crossing it (shapely polygonize), the
resulting convex pieces are joined across shared face sides with a
union-find, and the smaller of the two complementary regions is taken as
the triangle region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from shapely.geometry import LineString, Point, Polygon
from shapely.ops import polygonize, unary_union

from .comparison import relative_excess_of
from .model_trig import model_area
from .points import SurfacePoint
from .surface import curvature_measure, nxt, prv

OVERSHOOT = 1e-9


class RegionError(ValueError):
    """The triangle does not bound a disc that can be clipped."""


class OverlapError(ValueError):
    """Triangles of an excess family overlap."""


@dataclass
class TriangleRegion:
    vertices: tuple
    side_lengths: tuple
    pieces: list  # (face, shapely Polygon)
    area: float
    atoms: dict  # vertex -> mass, for atoms in the closed region
    diameter_bound: float

    @property
    def positive_mass(self) -> float:
        return math.fsum(m for m in self.atoms.values() if m > 0)

    @property
    def negative_mass(self) -> float:
        return -math.fsum(m for m in self.atoms.values() if m < 0)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)


def _extended(a, b, delta):
    d = b - a
    n = float(np.hypot(*d))
    if n == 0:
        return None
    u = d / n
    return LineString([a - delta * u, b + delta * u])


def _side_intervals(piece: Polygon, A, B, L, tol):
    """Parameter intervals (from A, in length units) where the piece boundary runs along side AB."""
    u = (B - A) / L
    coords = np.asarray(piece.exterior.coords)
    rel = coords - A
    along = rel @ u
    off = np.abs(rel[:, 0] * u[1] - rel[:, 1] * u[0])
    out = []
    for k in range(len(coords) - 1):
        if off[k] <= tol and off[k + 1] <= tol:
            t0, t1 = sorted((float(along[k]), float(along[k + 1])))
            if t1 - t0 > tol:
                out.append((max(t0, 0.0), min(t1, L)))
    return out


def triangle_region(oracle, p, q, r) -> TriangleRegion:
    """Clip the region bounded by the geodesic triangle [p q r]."""
    surface = oracle.surface
    layout = oracle.layout
    if not layout.flat:
        raise RegionError("region clipping is implemented for flat faces only")
    scale = float(surface.lengths.mean())
    delta = OVERSHOOT * scale
    paths = [oracle.path(p, q), oracle.path(q, r), oracle.path(r, p)]
    cuts: dict = {}
    for path in paths:
        for seg in path.segments:
            line = _extended(layout.position(seg.start), layout.position(seg.end), delta)
            if line is not None:
                cuts.setdefault(seg.face, []).append(line)

    pieces = []
    for f in range(surface.n_faces):
        poly = Polygon(layout.corners[f])
        if f not in cuts:
            pieces.append((f, poly))
            continue
        for piece in polygonize(unary_union([poly.exterior] + cuts[f])):
            if piece.area > 1e-14 * scale * scale and poly.contains(piece.representative_point()):
                pieces.append((f, piece))

    uf = _UnionFind(len(pieces))
    tol = 1e-9 * scale
    by_edge: dict = {}
    for n, (f, piece) in enumerate(pieces):
        for i in range(3):
            A, B = layout.corners[f, nxt(i)], layout.corners[f, prv(i)]
            L = float(surface.lengths[f, i])
            g, j = surface.other(f, i)
            for t0, t1 in _side_intervals(piece, A, B, L, tol):
                if (f, i) <= (g, j):
                    by_edge.setdefault((f, i), []).append((n, t0, t1, 0))
                else:
                    by_edge.setdefault((g, j), []).append((n, L - t1, L - t0, 1))
    for items in by_edge.values():
        for a in range(len(items)):
            na, a0, a1, sa = items[a]
            for b in range(a + 1, len(items)):
                nb, b0, b1, sb = items[b]
                if sa != sb and min(a1, b1) - max(a0, b0) > tol:
                    uf.union(na, nb)

    comps: dict = {}
    for n in range(len(pieces)):
        comps.setdefault(uf.find(n), []).append(n)
    groups = sorted(comps.values(), key=lambda g: math.fsum(pieces[n][1].area for n in g))
    through = [_vertices_on(surface, path) for path in paths]
    if len(groups) == 1:
        # a boundary that separates nothing encloses no area only if it is a tree:
        # three spokes meeting at a common vertex
        if not set.intersection(*through):
            raise RegionError("triangle boundary does not separate the surface")
        inside = []
    else:
        # pinched boundaries give several lobes; everything but the outer part
        inside = [pieces[n] for g in groups[:-1] for n in g]
    area = math.fsum(piece.area for _, piece in inside)

    atoms = {}
    measure = curvature_measure(surface)
    on_boundary = set.union(*through)
    for v, mass in measure.atoms.items():
        if v in on_boundary:
            atoms[v] = mass
            continue
        for f, i in surface.corners_of[v]:
            pt = Point(*(float(c) for c in layout.corners[f, i]))
            if any(g == f and piece.distance(pt) <= tol for g, piece in inside):
                atoms[v] = mass
                break

    sides = tuple(path.length for path in paths)
    return TriangleRegion((p, q, r), sides, inside, area, atoms, _diameter_bound(oracle, (p, q, r), inside, paths))


def _vertices_on(surface, path) -> set:
    out = set()
    for seg in path.segments:
        for pt in (seg.start, seg.end):
            if max(pt.bary) == 1.0:
                out.add(int(surface.faces[pt.face, pt.bary.index(1.0)]))
    return out


def _diameter_bound(oracle, corners, inside, paths) -> float:
    """Upper bound on the intrinsic diameter of the region.

    Every point of a (convex, in-face) piece lies within the piece diameter of
    one of its polygon vertices, so diam <= 2 * max_a d(u, a) + 2 * max piece
    diameter for any fixed u; the best of the three triangle corners is used.
    Boundary polyline points are included so that empty (tree-like) regions
    are covered too.
    """
    layout = oracle.layout
    verts = [pt for path in paths for seg in path.segments for pt in (seg.start, seg.end)]
    piece_diam = 0.0
    for f, piece in inside:
        coords = np.asarray(piece.exterior.coords)[:-1]
        if len(coords):
            piece_diam = max(piece_diam, float(np.max(np.hypot(*(coords[:, None, :] - coords[None, :, :]).transpose(2, 0, 1)))))
        for xy in coords:
            verts.append(_clamped_point(layout, f, xy))
    best = math.inf
    for u in corners:
        field = oracle.field(u)
        reach = max((field.distance(a) for a in verts), default=0.0)
        best = min(best, 2 * reach)
    return best + 2 * piece_diam


def _clamped_point(layout, f, xy) -> SurfacePoint:
    C = layout.corners[f]
    M = np.column_stack([C[1] - C[0], C[2] - C[0]])
    l1, l2 = np.linalg.solve(M, np.asarray(xy) - C[0])
    b = np.maximum([1 - l1 - l2, l1, l2], 0.0)
    return SurfacePoint(f, tuple(b / b.sum()))


@dataclass(frozen=True)
class AreaDistortion:
    lower_residual: float  # mu(T) - |T0| + omega_minus(T) * l^2 / 2
    upper_residual: float  # omega_plus(T) * l^2 / 2 - (mu(T) - |T0|)
    area: float
    model_area: float
    diameter_bound: float


def area_distortion_check(oracle, p, q, r, diameter_bound: float | None = None) -> AreaDistortion:
    """Residuals of the two-sided bound on mu(T) - |T0| by the curvature of T."""
    region = triangle_region(oracle, p, q, r)
    ell = region.diameter_bound if diameter_bound is None else diameter_bound
    flat = model_area(0.0, region.side_lengths)
    gap = region.area - flat
    return AreaDistortion(
        gap + 0.5 * region.negative_mass * ell * ell,
        0.5 * region.positive_mass * ell * ell - gap,
        region.area,
        flat,
        ell,
    )


def _overlap_area(a: TriangleRegion, b: TriangleRegion) -> float:
    total = 0.0
    for f, pa in a.pieces:
        for g, pb in b.pieces:
            if f == g:
                total += pa.intersection(pb).area
    return total


def excess_estimate(oracle, family, centre=None, radius: float | None = None) -> float:
    """Sum of excesses of a family of non-overlapping geodesic triangles.

    By definition of the positive curvature part this is a lower estimate of
    omega_plus(U) for any open U containing the family (checked against the
    ball ``B(centre, radius)`` when given).
    """
    family = list(family)
    if not family:
        return 0.0
    regions = [triangle_region(oracle, *tri) for tri in family]
    scale = float(oracle.surface.lengths.mean())
    for a in range(len(regions)):
        for b in range(a + 1, len(regions)):
            if _overlap_area(regions[a], regions[b]) > 1e-12 * scale * scale:
                raise OverlapError(f"triangles {a} and {b} overlap")
    if centre is not None:
        field = oracle.field(centre)
        for n, reg in enumerate(regions):
            for f, piece in reg.pieces:
                for xy in np.asarray(piece.exterior.coords)[:-1]:
                    if field.distance(_clamped_point(oracle.layout, f, xy)) >= radius:
                        raise ValueError(f"triangle {n} leaves the region")
    return math.fsum(relative_excess_of(oracle, 0.0, *tri) for tri in family)
