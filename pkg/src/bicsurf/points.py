"""Points on triangulated surfaces and per-face layouts in the model plane.

Each face is laid out once in M^2(k): in R^2 for k = 0, on the sphere of
radius 1/sqrt(k) in R^3 for k > 0 and on the upper sheet of the hyperboloid
``x^2 + y^2 - z^2 = 1/k`` for k < 0. Corner 0 sits at the origin (the pole
for curved faces) and corner 1 on the positive x-axis.

A point of a face is ``normalize(sum(bary[i] * corner[i]))`` where
``normalize`` is the identity for k = 0 and radial projection onto the model
surface otherwise; points on a side are therefore on the geodesic side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model_trig import _is_flat
from .surface import TriangulatedSurface, nxt, prv

ZERO_BARY = 1e-13


@dataclass(frozen=True)
class SurfacePoint:
    face: int
    bary: tuple

    def __post_init__(self):
        b = tuple(float(x) for x in self.bary)
        if len(b) != 3:
            raise ValueError("barycentric coordinates need three entries")
        if min(b) < -1e-9:
            raise ValueError(f"point outside its face: {b}")
        b = tuple(max(x, 0.0) for x in b)
        s = sum(b)
        if s <= 0:
            raise ValueError("barycentric coordinates sum to zero")
        object.__setattr__(self, "face", int(self.face))
        object.__setattr__(self, "bary", tuple(x / s for x in b))

    def to_json(self):
        return {"face": self.face, "bary": list(self.bary)}

    @classmethod
    def from_json(cls, data):
        return cls(int(data["face"]), tuple(data["bary"]))


def _minkowski(x, y):
    return x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1] - x[..., 2] * y[..., 2]


class Layout:
    """Model-plane coordinates of every face of a surface."""

    def __init__(self, surface: TriangulatedSurface):
        self.surface = surface
        k = surface.k
        self.k = k
        self.flat = _is_flat(k, float(surface.lengths.max()))
        self.R = None if self.flat else 1.0 / math.sqrt(abs(k))
        F = surface.n_faces
        dim = 2 if self.flat else 3
        corners = np.zeros((F, 3, dim))
        for f in range(F):
            l = surface.lengths[f]
            alpha = float(surface.corner_angles[f, 0])
            corners[f, 0] = self._polar(0.0, 0.0)
            corners[f, 1] = self._polar(l[2], 0.0)
            corners[f, 2] = self._polar(l[1], alpha)
        corners.setflags(write=False)
        self.corners = corners

    def _polar(self, d, psi):
        if self.flat:
            return np.array([d * math.cos(psi), d * math.sin(psi)])
        R = self.R
        if self.k > 0:
            return R * np.array([math.sin(d / R) * math.cos(psi), math.sin(d / R) * math.sin(psi), math.cos(d / R)])
        return R * np.array([math.sinh(d / R) * math.cos(psi), math.sinh(d / R) * math.sin(psi), math.cosh(d / R)])

    def normalize(self, v: np.ndarray) -> np.ndarray:
        if self.flat:
            return v
        if self.k > 0:
            n = np.linalg.norm(v, axis=-1, keepdims=True)
        else:
            n = np.sqrt(-_minkowski(v, v))[..., None]
        return self.R * v / n

    def distance(self, x: np.ndarray, y: np.ndarray):
        """Model distance between layout coordinates (broadcasting)."""
        d = np.asarray(x) - np.asarray(y)
        if self.flat:
            return np.sqrt(np.sum(d * d, axis=-1))
        R = self.R
        if self.k > 0:
            c = np.sqrt(np.sum(d * d, axis=-1))
            return 2 * R * np.arcsin(np.minimum(c / (2 * R), 1.0))
        m = np.sqrt(np.maximum(_minkowski(d, d), 0.0))
        return 2 * R * np.arcsinh(m / (2 * R))

    def position(self, p: SurfacePoint) -> np.ndarray:
        return self.normalize(np.asarray(p.bary) @ self.corners[p.face])

    def point(self, face: int, x) -> SurfacePoint:
        """Inverse of :meth:`position` for a point lying in ``face``."""
        C = self.corners[face]
        x = np.asarray(x, dtype=float)
        if self.flat:
            M = np.column_stack([C[1] - C[0], C[2] - C[0]])
            l1, l2 = np.linalg.solve(M, x - C[0])
            bary = (1 - l1 - l2, l1, l2)
        else:
            lam = np.linalg.solve(C.T, x)
            bary = tuple(lam / lam.sum())
        bary = tuple(0.0 if abs(b) < ZERO_BARY else b for b in bary)
        return SurfacePoint(face, tuple(max(b, 0.0) for b in bary))

    def edge_point(self, face: int, slot: int, u: float) -> SurfacePoint:
        """Point at arclength fraction ``u`` along side ``slot`` (from corner slot+1)."""
        L = float(self.surface.lengths[face, slot])
        if self.flat:
            w0, w1 = 1.0 - u, u
        else:
            f = math.sin if self.k > 0 else math.sinh
            w0, w1 = f((1 - u) * L / self.R), f(u * L / self.R)
        bary = [0.0, 0.0, 0.0]
        bary[nxt(slot)] = w0
        bary[prv(slot)] = w1
        if u <= 0:
            bary = [0.0, 0.0, 0.0]
            bary[nxt(slot)] = 1.0
        elif u >= 1:
            bary = [0.0, 0.0, 0.0]
            bary[prv(slot)] = 1.0
        return SurfacePoint(face, tuple(bary))

    def edge_fraction(self, p: SurfacePoint, slot: int) -> float:
        """Arclength fraction of a point on side ``slot`` of its face."""
        A = self.corners[p.face, nxt(slot)]
        L = float(self.surface.lengths[p.face, slot])
        return float(self.distance(A, self.position(p))) / L


def location(p: SurfacePoint):
    """Classify a point: ('face',), ('edge', slot) or ('vertex', corner)."""
    zeros = [i for i in range(3) if p.bary[i] <= ZERO_BARY]
    if len(zeros) == 0:
        return ("face",)
    if len(zeros) == 1:
        return ("edge", zeros[0])
    return ("vertex", [i for i in range(3) if i not in zeros][0])


def star(layout: Layout, p: SurfacePoint) -> list[tuple[int, np.ndarray]]:
    """All (face, position) pairs representing ``p`` in the closed faces containing it."""
    surface = layout.surface
    loc = location(p)
    if loc[0] == "face":
        return [(p.face, layout.position(p))]
    if loc[0] == "edge":
        slot = loc[1]
        g, j = surface.other(p.face, slot)
        u = layout.edge_fraction(p, slot)
        q = layout.edge_point(g, j, 1.0 - u)
        return [(p.face, layout.position(p)), (g, layout.position(q))]
    v = int(surface.faces[p.face, loc[1]])
    return [(f, layout.corners[f, i]) for f, i in surface.corners_of[v]]


def same_point(layout: Layout, p: SurfacePoint, q: SurfacePoint, tol: float = 1e-9) -> bool:
    for f, x in star(layout, p):
        for g, y in star(layout, q):
            if f == g and float(layout.distance(x, y)) <= tol:
                return True
    return False


def layout_of(surface: TriangulatedSurface) -> Layout:
    cache = surface.__dict__.setdefault("_layout", None)
    if cache is None:
        cache = Layout(surface)
        surface.__dict__["_layout"] = cache
    return cache


def uniform_point(surface: TriangulatedSurface, rng: np.random.Generator, face: int | None = None) -> SurfacePoint:
    if face is None:
        w = np.asarray(surface.face_areas)
        face = int(rng.choice(len(w), p=w / w.sum()))
    r1, r2 = rng.random(2)
    s = math.sqrt(r1)
    return SurfacePoint(face, (1 - s, s * (1 - r2), s * r2))


def corner_fan(surface: TriangulatedSurface, face: int, corner: int) -> list[tuple[int, int]]:
    """Corners around the vertex at (face, corner), in counter-clockwise order."""
    out = [(face, corner)]
    f, i = face, corner
    while True:
        g, j = surface.other(f, nxt(i))
        f, i = g, nxt(j)
        if (f, i) == (face, corner):
            return out
        out.append((f, i))


def polar_point(layout: Layout, face: int, corner: int, r: float, psi: float) -> SurfacePoint:
    """Point at distance r from a vertex, at angle psi counter-clockwise from side corner -> corner+1.

    Flat layouts only; r must be smaller than the distance from the vertex to
    the opposite sides of the faces it passes.
    """
    if not layout.flat:
        raise ValueError("polar points are implemented for flat layouts")
    angles = layout.surface.corner_angles
    fan = corner_fan(layout.surface, face, corner)
    total = sum(float(angles[f, i]) for f, i in fan)
    psi = psi % total
    for f, i in fan:
        a = float(angles[f, i])
        if psi <= a or (f, i) == fan[-1]:
            C = layout.corners[f]
            d = C[nxt(i)] - C[i]
            base = math.atan2(d[1], d[0]) + min(psi, a)
            return layout.point(f, C[i] + r * np.array([math.cos(base), math.sin(base)]))
        psi -= a
    raise AssertionError("unreachable")
