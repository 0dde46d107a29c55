"""Distance oracles consumed by the comparison suite.

An oracle maps pairs of points to distances, can draw random points, and
optionally interpolates along a minimizing geodesic. Three kinds exist:
the Euclidean plane (calibration), exact cones, and triangulated surfaces
(exact window solver for flat faces, Steiner graph otherwise).
"""

from __future__ import annotations

import math
from collections import OrderedDict

import numpy as np

from .cone import ConePoint, ConeSpec, cone_distance, cone_interpolate
from .exact import ExactDistanceField
from .paths import point_on_geodesic
from .points import SurfacePoint, layout_of, uniform_point
from .steiner import SteinerField
from .surface import TriangulatedSurface

EXACT_TOLERANCE = 1e-6
APPROX_TOLERANCE = 1e-4


class _Oracle:
    exact = True
    interpolates = True

    @property
    def default_tolerance(self) -> float:
        return EXACT_TOLERANCE if self.exact else APPROX_TOLERANCE

    def pairwise(self, points) -> np.ndarray:
        n = len(points)
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                D[i, j] = D[j, i] = self.distance(points[i], points[j])
        return D

    def sample_ball(self, rng, centre, radius: float, m: int, max_tries: int = 100_000) -> list:
        out = []
        for _ in range(max_tries):
            if len(out) == m:
                break
            x = self._propose_near(rng, centre, radius)
            if self.distance(centre, x) < radius:
                out.append(x)
        if len(out) < m:
            raise RuntimeError("ball sampling failed to find enough points")
        return out


class PlaneOracle(_Oracle):
    """Euclidean plane; points are (x, y) tuples."""

    def __init__(self, extent: float = 1.0):
        self.extent = extent

    def distance(self, p, q) -> float:
        return math.hypot(p[0] - q[0], p[1] - q[1])

    def interpolate(self, p, q, t: float):
        if not 0 <= t <= 1:
            raise ValueError("t outside [0, 1]")
        return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))

    def sample(self, rng):
        x, y = rng.uniform(-self.extent, self.extent, 2)
        return (float(x), float(y))

    def _propose_near(self, rng, centre, radius):
        x, y = rng.uniform(-radius, radius, 2)
        return (centre[0] + float(x), centre[1] + float(y))

    def pairwise(self, points) -> np.ndarray:
        P = np.asarray(points, dtype=float)
        return np.hypot(P[:, None, 0] - P[None, :, 0], P[:, None, 1] - P[None, :, 1])

    @staticmethod
    def point_to_json(p):
        return [float(p[0]), float(p[1])]


class ConeOracle(_Oracle):
    """Closed-form distances on a kappa-cone; points are ConePoints with r below ``radius``."""

    def __init__(self, cone: ConeSpec, radius: float | None = None):
        self.cone = cone
        if radius is None:
            radius = 0.95 * cone.max_radius if cone.kappa > 0 else 2.0
        if cone.kappa > 0 and radius >= cone.max_radius:
            raise ValueError("sampling radius must stay inside the cap")
        self.radius = radius

    def distance(self, p: ConePoint, q: ConePoint) -> float:
        return cone_distance(self.cone, p, q)

    def interpolate(self, p, q, t):
        return cone_interpolate(self.cone, p, q, t)

    def sample(self, rng) -> ConePoint:
        r = self.radius * math.sqrt(rng.random())
        return self.cone.point(r, rng.random() * self.cone.theta)

    def _propose_near(self, rng, centre, radius):
        r = min(self.radius, centre.r + radius) * math.sqrt(rng.random())
        return self.cone.point(r, rng.random() * self.cone.theta)

    def special_points(self):
        return [self.cone.point(0.0, 0.0)]

    @staticmethod
    def point_to_json(p):
        return {"r": p.r, "phi": p.phi}


def _key(p: SurfacePoint):
    return (p.face, p.bary)


class SurfaceOracle(_Oracle):
    """Distances on a triangulated surface with a cache of single-source fields."""

    def __init__(self, surface: TriangulatedSurface, mode: str | None = None, refinement: int = 8, cache_size: int = 512):
        self.surface = surface
        self.layout = layout_of(surface)
        if mode is None:
            mode = "exact" if self.layout.flat else "steiner"
        if mode not in ("exact", "steiner"):
            raise ValueError(f"unknown oracle mode {mode!r}")
        if mode == "exact" and not self.layout.flat:
            raise ValueError("exact mode needs a flat surface")
        self.mode = mode
        self.exact = mode == "exact"
        self.interpolates = self.exact
        self.refinement = refinement
        self._cache: OrderedDict = OrderedDict()
        self.cache_size = cache_size

    def field(self, p: SurfacePoint):
        k = _key(p)
        f = self._cache.get(k)
        if f is None:
            if self.exact:
                f = ExactDistanceField(self.surface, p)
            else:
                f = SteinerField(self.surface, p, self.refinement)
            self._cache[k] = f
            if len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        else:
            self._cache.move_to_end(k)
        return f

    def distance(self, p: SurfacePoint, q: SurfacePoint) -> float:
        if _key(q) < _key(p):
            p, q = q, p
        return self.field(p).distance(q)

    def pairwise(self, points) -> np.ndarray:
        n = len(points)
        order = sorted(range(n), key=lambda i: _key(points[i]))
        D = np.zeros((n, n))
        for a, i in enumerate(order):
            f = self.field(points[i])
            for j in order[a + 1:]:
                D[i, j] = D[j, i] = f.distance(points[j])
        return D

    def path(self, p: SurfacePoint, q: SurfacePoint):
        if not self.exact:
            raise ValueError("geodesic paths need the exact solver")
        return self.field(p).path(q)

    def interpolate(self, p: SurfacePoint, q: SurfacePoint, t: float) -> SurfacePoint:
        return point_on_geodesic(self.layout, self.path(p, q), t)

    def sample(self, rng) -> SurfacePoint:
        return uniform_point(self.surface, rng)

    def sample_ball(self, rng, centre, radius: float, m: int, max_tries: int = 100_000) -> list:
        s = self.surface
        field = self.field(centre)
        near = []
        for f in range(s.n_faces):
            corner_d = min(field.distance(SurfacePoint(f, tuple(float(i == c) for i in range(3)))) for c in range(3))
            if corner_d < radius + float(s.lengths[f].max()):
                near.append(f)
        w = np.array([s.face_areas[f] for f in near])
        w = w / w.sum()
        out = []
        for _ in range(max_tries):
            if len(out) == m:
                return out
            f = near[int(rng.choice(len(near), p=w))]
            x = uniform_point(s, rng, face=f)
            if field.distance(x) < radius:
                out.append(x)
        raise RuntimeError("ball sampling failed to find enough points")

    def special_points(self):
        """One point per vertex with a curvature atom."""
        out = []
        angles = self.surface.corner_angles
        for v, corners in sorted(self.surface.corners_of.items()):
            theta = sum(float(angles[f, i]) for f, i in corners)
            if abs(theta - 2 * math.pi) > 1e-9:
                f, i = corners[0]
                out.append(SurfacePoint(f, tuple(float(j == i) for j in range(3))))
        return out

    @staticmethod
    def point_to_json(p):
        return p.to_json()
