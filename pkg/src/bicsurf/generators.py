"""Instance generators.

Every generator returns a validated TriangulatedSurface. Convex-hull style
instances only keep intrinsic side lengths; the 3D embedding is used once to
measure them and then dropped.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .points import SurfacePoint, layout_of
from .surface import TriangulatedSurface, glue_by_keys, glue_by_labels, nxt, prv, subdivide, validate

log = logging.getLogger(__name__)


class InvalidInstanceError(ValueError):
    pass


def _checked(surface: TriangulatedSurface) -> TriangulatedSurface:
    diags = validate(surface)
    if diags:
        raise InvalidInstanceError("; ".join(str(d) for d in diags[:5]))
    return surface


def _outward(points: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    centre = points.mean(axis=0)
    faces = []
    for a, b, c in simplices:
        n = np.cross(points[b] - points[a], points[c] - points[a])
        faces.append((a, b, c) if np.dot(n, points[a] - centre) > 0 else (a, c, b))
    return np.array(faces, dtype=np.int64)


def polyhedron_surface(points, faces, k: float = 0.0, metadata=None) -> TriangulatedSurface:
    """Surface from an embedded triangle mesh; side lengths are chords (k=0) or arcs (k=1 on the unit sphere)."""
    points = np.asarray(points, dtype=float)
    faces = np.asarray(faces, dtype=np.int64)
    lengths = np.zeros(faces.shape, dtype=float)
    for f, tri in enumerate(faces):
        for i in range(3):
            u, v = sorted((int(tri[nxt(i)]), int(tri[prv(i)])))
            chord = float(np.linalg.norm(points[u] - points[v]))
            lengths[f, i] = chord if k == 0 else 2.0 * math.asin(min(chord / 2.0, 1.0)) / math.sqrt(k)
    return _checked(TriangulatedSurface(faces, lengths, glue_by_labels(faces), k, dict(metadata or {})))


def convex_hull_surface(points, metadata=None) -> TriangulatedSurface:
    points = np.asarray(points, dtype=float)
    hull = ConvexHull(points)
    used = np.unique(hull.simplices)
    remap = -np.ones(len(points), dtype=np.int64)
    remap[used] = np.arange(len(used))
    pts = points[used]
    faces = _outward(pts, remap[hull.simplices])
    return polyhedron_surface(pts, faces, 0.0, metadata)


def gen_convex_hull(n: int, seed: int, max_attempts: int = 50) -> TriangulatedSurface:
    """Hull of ``n`` seeded random points on a random ellipsoid."""
    if not 4 <= n <= 200:
        raise InvalidInstanceError(f"convex_hull point count must be in 4..200, got {n}")
    rng = np.random.default_rng(seed)
    for attempt in range(max_attempts):
        axes = rng.uniform(0.6, 1.4, size=3)
        x = rng.normal(size=(n, 3))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        x *= axes
        try:
            surface = convex_hull_surface(x, {"generator": "convex_hull", "n": n, "seed": seed})
        except (QhullError, InvalidInstanceError) as exc:
            log.warning("degenerate hull (attempt %d, seed %d): %s; regenerating", attempt, seed, exc)
            continue
        if len(surface.vertices) == n and float(surface.corner_angles.min()) > 1e-3:
            return surface
        log.warning("hull with %d/%d vertices or thin faces (seed %d); regenerating", len(surface.vertices), n, seed)
    raise InvalidInstanceError(f"could not generate a non-degenerate hull for n={n}, seed={seed}")


def cube(side: float = 1.0) -> TriangulatedSurface:
    pts = side * np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], dtype=float)
    return convex_hull_surface(pts, {"generator": "cube", "side": side})


# ---------------------------------------------------------------- tori
def rectangle_torus(width: float, height: float, nu: int, nv: int, metadata=None) -> TriangulatedSurface:
    """Flat torus from the width x height rectangle with opposite sides glued, on an nu x nv grid."""
    if nu < 1 or nv < 1 or width <= 0 or height <= 0:
        raise InvalidInstanceError("rectangle torus needs positive sizes and grid counts")
    faces, lengths, keys = [], [], []

    def label(i, j):
        return (i % nu) * nv + (j % nv)

    def key(p, q):
        a = (p[0] % nu, p[1] % nv, q[0] - p[0], q[1] - p[1])
        b = (q[0] % nu, q[1] % nv, p[0] - q[0], p[1] - q[1])
        return min(a, b)

    dx, dy = width / nu, height / nv
    for i in range(nu):
        for j in range(nv):
            for tri in (((i, j), (i + 1, j), (i + 1, j + 1)), ((i, j), (i + 1, j + 1), (i, j + 1))):
                faces.append([label(*p) for p in tri])
                row_l, row_k = [], []
                for s in range(3):
                    p, q = tri[nxt(s)], tri[prv(s)]
                    row_l.append(math.hypot((q[0] - p[0]) * dx, (q[1] - p[1]) * dy))
                    row_k.append(key(p, q))
                lengths.append(row_l)
                keys.append(row_k)
    meta = {"generator": "rectangle_torus", "width": width, "height": height, "nu": nu, "nv": nv}
    meta.update(metadata or {})
    return _checked(TriangulatedSurface(np.array(faces), np.array(lengths), glue_by_keys(keys), 0.0, meta))


def flat_torus(nu: int = 4, nv: int = 4) -> TriangulatedSurface:
    """Unit square torus; the 4 x 4 grid keeps Steiner paths close to straight lines."""
    return rectangle_torus(1.0, 1.0, nu, nv, {"generator": "flat_torus"})


def cylinder_torus(a: float = 1.0, b: float = 10.0, nu: int = 3, nv: int | None = None) -> TriangulatedSurface:
    """Long a x b rectangle torus (b >= 10a): a flat cylinder of circumference a, closed up far away.

    The waist at height b/2 is recorded in the metadata together with the
    locality radius a/4.
    """
    if b < 10 * a:
        raise InvalidInstanceError(f"cylinder torus needs b >= 10a, got a={a}, b={b}")
    if nv is None:
        nv = max(1, int(round(nu * b / a)))
    meta = {
        "generator": "cylinder_torus",
        "waist": {"height": b / 2, "circumference": a},
        "locality_radius": a / 4,
    }
    return rectangle_torus(a, b, nu, nv, meta)


def rectangle_torus_point(surface: TriangulatedSurface, x: float, y: float) -> SurfacePoint:
    m = surface.metadata
    w, h, nu, nv = m["width"], m["height"], m["nu"], m["nv"]
    x, y = x % w, y % h
    u, v = x / w * nu, y / h * nv
    i, j = min(int(u), nu - 1), min(int(v), nv - 1)
    fu, fv = u - i, v - j
    if fu >= fv:
        f = 2 * (i * nv + j)
        bary = (1 - fu, fu - fv, fv)
    else:
        f = 2 * (i * nv + j) + 1
        bary = (1 - fv, fu, fv - fu)
    return SurfacePoint(f, tuple(max(b, 0.0) for b in bary))


def waist_markers(surface: TriangulatedSurface) -> dict:
    """Points on the waist circle: p at a/2 and w0, w1, w2 at 0, a/3, 2a/3."""
    a = surface.metadata["waist"]["circumference"]
    yh = surface.metadata["waist"]["height"]
    return {
        "p": rectangle_torus_point(surface, a / 2, yh),
        "w0": rectangle_torus_point(surface, 0.0, yh),
        "w1": rectangle_torus_point(surface, a / 3, yh),
        "w2": rectangle_torus_point(surface, 2 * a / 3, yh),
    }


# -------------------------------------------------------------- octagon
def octagon_genus2(side: float = 1.0) -> TriangulatedSurface:
    """Regular flat octagon with opposite sides glued by translations.

    Triangulated as a fan of eight faces around the centre; all octagon
    corners become one vertex of cone angle 6*pi. Vertex 0 is the corner
    vertex, vertex 1 the centre.
    """
    R = side / (2 * math.sin(math.pi / 8))
    faces = np.array([[1, 0, 0]] * 8, dtype=np.int64)
    lengths = np.array([[side, R, R]] * 8, dtype=float)
    gluing = np.zeros((8, 3, 2), dtype=np.int64)
    for i in range(8):
        gluing[i, 0] = ((i + 4) % 8, 0)
        gluing[i, 2] = ((i - 1) % 8, 1)
        gluing[i, 1] = ((i + 1) % 8, 2)
    meta = {"generator": "octagon_genus2", "side": side, "locality_radius": 0.25 * side}
    return _checked(TriangulatedSurface(faces, lengths, gluing, 0.0, meta))


def octagon_point(surface: TriangulatedSurface, x: float, y: float) -> SurfacePoint:
    """Point from planar coordinates centred in the octagon, corner P_0 at angle -pi/8."""
    ang = math.atan2(y, x) + math.pi / 8
    f = int(math.floor(ang / (math.pi / 4))) % 8
    psi = ang - f * math.pi / 4
    r = math.hypot(x, y)
    if r == 0:
        return SurfacePoint(0, (1.0, 0.0, 0.0))
    # layout corner 0 is the centre, corner 1 is P_f on the x-axis
    return layout_of(surface).point(f, np.array([r * math.cos(psi), r * math.sin(psi)]))


# ----------------------------------------------------------------- cones
def triangulated_cone(theta: float, n: int = 16, rim: float = 4.0) -> TriangulatedSurface:
    """Flat cone of total angle theta, cut at radius ``rim`` and doubled along the rim.

    The upper fan (faces 0..n-1) is the cone itself; points with r well below
    the rim have the same distances as on the infinite cone.
    """
    if theta <= 0 or theta / n >= math.pi:
        raise InvalidInstanceError("each sector must have angle in (0, pi)")
    chord = 2 * rim * math.sin(theta / (2 * n))
    top, bottom = 0, 1
    ring = [2 + i for i in range(n)]
    faces, lengths = [], []
    for i in range(n):
        faces.append([top, ring[i], ring[(i + 1) % n]])
        lengths.append([chord, rim, rim])
    for i in range(n):
        faces.append([bottom, ring[(i + 1) % n], ring[i]])
        lengths.append([chord, rim, rim])
    faces = np.array(faces, dtype=np.int64)
    meta = {"generator": "triangulated_cone", "theta": theta, "n": n, "rim": rim}
    return _checked(TriangulatedSurface(faces, np.array(lengths), glue_by_labels(faces), 0.0, meta))


def cone_surface_point(surface: TriangulatedSurface, r: float, phi: float) -> SurfacePoint:
    m = surface.metadata
    theta, n = m["theta"], m["n"]
    if r == 0:
        return SurfacePoint(0, (1.0, 0.0, 0.0))
    phi = phi % theta
    width = theta / n
    f = min(int(phi // width), n - 1)
    psi = phi - f * width
    layout = layout_of(surface)
    return layout.point(f, np.array([r * math.cos(psi), r * math.sin(psi)]))


# ---------------------------------------------------------------- sphere
def _icosahedron():
    t = (1 + math.sqrt(5)) / 2
    v = []
    for a in (-1, 1):
        for b in (-t, t):
            v += [(0, a, b), (a, b, 0), (b, 0, a)]
    v = np.array(v, dtype=float)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _icosa_mesh():
    pts = _icosahedron()
    return pts, _outward(pts, ConvexHull(pts).simplices)


def sphere_icosa(subdivisions: int = 0) -> TriangulatedSurface:
    """kappa = 1 unit sphere tiled by geodesic triangles over an icosahedron."""
    pts, faces = _icosa_mesh()
    s = polyhedron_surface(pts, faces, 1.0, {"generator": "sphere_icosa", "subdivisions": subdivisions})
    for _ in range(subdivisions):
        s = subdivide(s)
    return _checked(s)


def sphere_point(surface: TriangulatedSurface, x) -> SurfacePoint:
    """SurfacePoint of the undivided icosa sphere at the unit vector ``x``."""
    if surface.metadata.get("subdivisions", 0) != 0:
        raise ValueError("sphere_point needs the undivided icosa sphere")
    pts, faces = _icosa_mesh()
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x)
    layout = layout_of(surface)
    for f, tri in enumerate(faces):
        lam = np.linalg.solve(pts[tri].T, x)
        if lam.min() >= -1e-12:
            # the layout copy of a face is an isometric image of the embedded one,
            # and isometries of the sphere are linear
            return layout.point(f, layout.normalize(lam @ layout.corners[f]))
    raise RuntimeError("point not located on any face")
