"""Closed oriented piecewise-M^2(k) triangulated surfaces.

A surface is given by

* ``faces``   -- |F|x3 vertex labels, corners listed counter-clockwise;
* ``lengths`` -- |F|x3 side lengths, ``lengths[f, i]`` is the side opposite
  corner ``i`` (it joins corners ``i+1`` and ``i+2``);
* ``gluing``  -- |F|x3x2 map sending the face-side ``(f, i)`` to the face-side
  ``(g, j)`` it is glued to. Gluing reverses direction: corner ``i+1`` of ``f``
  is identified with corner ``j+2`` of ``g`` and ``i+2`` with ``j+1``.

Every face is a geodesic triangle of the model plane of curvature ``k``, so
the curvature measure is explicit: an atom ``2*pi - theta_v`` at each vertex
plus the density ``k`` with respect to area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable

import numpy as np

from .cone import Certification
from .model_trig import model_angle, model_area, model_side, triangle_exists

TWO_PI = 2 * math.pi
ANGLE_TOL = 1e-9
LENGTH_RTOL = 1e-12


def nxt(i: int) -> int:
    return (i + 1) % 3


def prv(i: int) -> int:
    return (i + 2) % 3


@dataclass(frozen=True)
class Diagnostic:
    invariant: str
    element: tuple
    message: str

    def __str__(self):
        return f"[{self.invariant}] {self.element}: {self.message}"


@dataclass(frozen=True, eq=False)
class TriangulatedSurface:
    faces: np.ndarray
    lengths: np.ndarray
    gluing: np.ndarray
    k: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        faces = np.array(self.faces, dtype=np.int64).reshape(-1, 3)
        lengths = np.array(self.lengths, dtype=np.float64).reshape(-1, 3)
        gluing = np.array(self.gluing, dtype=np.int64).reshape(-1, 3, 2)
        for arr in (faces, lengths, gluing):
            arr.setflags(write=False)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "gluing", gluing)
        object.__setattr__(self, "k", float(self.k))

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def n_edges(self) -> int:
        return 3 * self.n_faces // 2

    @cached_property
    def vertices(self) -> list:
        return sorted(set(int(v) for v in self.faces.ravel()))

    def other(self, f: int, i: int) -> tuple[int, int]:
        g, j = self.gluing[f, i]
        return int(g), int(j)

    @cached_property
    def corner_angles(self) -> np.ndarray:
        """|F|x3 interior angles; ``corner_angles[f, i]`` is the angle at corner i."""
        out = np.empty((self.n_faces, 3))
        for f in range(self.n_faces):
            l = self.lengths[f]
            for i in range(3):
                out[f, i] = model_angle(self.k, (l[i], l[nxt(i)], l[prv(i)]))
        out.setflags(write=False)
        return out

    @cached_property
    def face_areas(self) -> np.ndarray:
        out = np.array([model_area(self.k, tuple(l)) for l in self.lengths])
        out.setflags(write=False)
        return out

    @cached_property
    def corners_of(self) -> dict:
        """Vertex label -> list of corners (f, i) carrying it."""
        out: dict = {}
        for f in range(self.n_faces):
            for i in range(3):
                out.setdefault(int(self.faces[f, i]), []).append((f, i))
        return out

    def edge_pairs(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        """Each undirected edge once, as ((f, i), (g, j)) with (f, i) < (g, j)."""
        out = []
        for f in range(self.n_faces):
            for i in range(3):
                g, j = self.other(f, i)
                if (f, i) < (g, j):
                    out.append(((f, i), (g, j)))
        return out

    def relabeled(self, vertex_map: dict | None = None, face_perm=None) -> "TriangulatedSurface":
        """Same surface with renamed vertices and/or permuted face order."""
        faces = self.faces.copy()
        if vertex_map is not None:
            faces = np.vectorize(lambda v: vertex_map[int(v)])(faces)
        if face_perm is None:
            return TriangulatedSurface(faces, self.lengths, self.gluing, self.k, dict(self.metadata))
        perm = np.asarray(face_perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        gluing = self.gluing[perm].copy()
        gluing[..., 0] = inv[gluing[..., 0]]
        return TriangulatedSurface(faces[perm], self.lengths[perm], gluing, self.k, dict(self.metadata))


def glue_by_keys(keys: list[list[Hashable]]) -> np.ndarray:
    """Build a gluing from per-face-side edge keys; each key must occur exactly twice."""
    seen: dict = {}
    gluing = -np.ones((len(keys), 3, 2), dtype=np.int64)
    for f, row in enumerate(keys):
        for i, key in enumerate(row):
            if key in seen:
                g, j = seen.pop(key)
                gluing[f, i] = (g, j)
                gluing[g, j] = (f, i)
            else:
                seen[key] = (f, i)
    if seen:
        raise ValueError(f"unmatched edge keys: {list(seen)[:5]}")
    return gluing


def glue_by_labels(faces) -> np.ndarray:
    """Gluing for simplicial surfaces: side (u -> v) matches side (v -> u)."""
    keys = []
    for tri in np.asarray(faces):
        keys.append([tuple(sorted((int(tri[nxt(i)]), int(tri[prv(i)])))) for i in range(3)])
    # orientation is checked by validate(); keys only need the unordered pair
    return glue_by_keys(keys)


def validate(surface: TriangulatedSurface) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    F = surface.n_faces
    if F == 0:
        return [Diagnostic("nonempty", (), "surface has no faces")]
    G = surface.gluing
    L = surface.lengths
    for f in range(F):
        for i in range(3):
            g, j = (int(x) for x in G[f, i])
            if not (0 <= g < F and 0 <= j < 3):
                diags.append(Diagnostic("gluing", (f, i), f"glued to invalid face-side {(g, j)}"))
                continue
            if (g, j) == (f, i):
                diags.append(Diagnostic("gluing", (f, i), "face-side glued to itself"))
                continue
            if tuple(G[g, j]) != (f, i):
                diags.append(
                    Diagnostic("gluing", (f, i), f"not an involution: {(g, j)} maps to {tuple(G[g, j])}")
                )
                continue
            if (f, i) < (g, j):
                a, b = L[f, i], L[g, j]
                if abs(a - b) > LENGTH_RTOL * max(abs(a), abs(b), 1.0):
                    diags.append(
                        Diagnostic("edge-length", (f, i), f"length {a!r} glued to {(g, j)} of length {b!r}")
                    )
            fa, fb = surface.faces[f, nxt(i)], surface.faces[f, prv(i)]
            ga, gb = surface.faces[g, prv(j)], surface.faces[g, nxt(j)]
            if (fa, fb) != (ga, gb):
                diags.append(
                    Diagnostic(
                        "orientation",
                        (f, i),
                        f"side ({fa}->{fb}) glued to {(g, j)} whose reversed side is ({ga}->{gb})",
                    )
                )
    for f in range(F):
        sides = tuple(float(x) for x in L[f])
        if not triangle_exists(surface.k, sides):
            diags.append(Diagnostic("feasibility", (f,), f"sides {sides} infeasible for k={surface.k!r}"))
        elif model_area(surface.k, sides) <= 0:
            diags.append(Diagnostic("feasibility", (f,), f"sides {sides} give a degenerate face"))
    if any(d.invariant == "gluing" for d in diags):
        return diags
    # vertex links: corners identified around each vertex must form one cycle per label
    parent = list(range(3 * F))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f in range(F):
        for i in range(3):
            g, j = (int(x) for x in G[f, i])
            for a, b in ((3 * f + nxt(i), 3 * g + prv(j)), (3 * f + prv(i), 3 * g + nxt(j))):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
    classes_of: dict = {}
    for c in range(3 * F):
        classes_of.setdefault(int(surface.faces.flat[c]), set()).add(find(c))
    for v, classes in classes_of.items():
        if len(classes) > 1:
            diags.append(Diagnostic("manifold", (v,), f"vertex link splits into {len(classes)} cycles"))
    # connectivity
    seen = {0}
    stack = [0]
    while stack:
        f = stack.pop()
        for i in range(3):
            g = int(G[f, i, 0])
            if g not in seen:
                seen.add(g)
                stack.append(g)
    if len(seen) != F:
        diags.append(Diagnostic("connected", (), f"{F - len(seen)} faces unreachable from face 0"))
    return diags


def cone_angles(surface: TriangulatedSurface) -> dict:
    theta: dict = {}
    ang = surface.corner_angles
    for f in range(surface.n_faces):
        for i in range(3):
            v = int(surface.faces[f, i])
            theta[v] = theta.get(v, 0.0) + float(ang[f, i])
    return theta


@dataclass(frozen=True)
class CurvatureMeasure:
    """Atoms at vertices plus a constant density with respect to area."""

    atoms: dict
    density: float

    def positive_part(self, area: float, vertices: Iterable | None = None) -> float:
        keys = self.atoms if vertices is None else [v for v in vertices if v in self.atoms]
        return sum(max(self.atoms[v], 0.0) for v in keys) + max(self.density, 0.0) * area

    def negative_part(self, area: float, vertices: Iterable | None = None) -> float:
        keys = self.atoms if vertices is None else [v for v in vertices if v in self.atoms]
        return sum(max(-self.atoms[v], 0.0) for v in keys) + max(-self.density, 0.0) * area

    def total(self, area: float) -> float:
        return sum(self.atoms.values()) + self.density * area


def curvature_measure(surface: TriangulatedSurface) -> CurvatureMeasure:
    atoms = {}
    for v, th in sorted(cone_angles(surface).items()):
        if abs(th - TWO_PI) > ANGLE_TOL:
            atoms[v] = TWO_PI - th
    return CurvatureMeasure(atoms, surface.k)


def total_area(surface: TriangulatedSurface) -> float:
    return float(math.fsum(surface.face_areas))


def euler_characteristic(surface: TriangulatedSurface) -> int:
    return len(surface.vertices) - surface.n_edges + surface.n_faces


def gauss_bonnet_residual(surface: TriangulatedSurface) -> float:
    # sum over all vertices, flat ones included, so nothing is lost to ANGLE_TOL
    atoms = math.fsum(TWO_PI - th for th in cone_angles(surface).values())
    return atoms + surface.k * total_area(surface) - TWO_PI * euler_characteristic(surface)


def cusp_scan(measure: CurvatureMeasure | TriangulatedSurface) -> list:
    if isinstance(measure, TriangulatedSurface):
        measure = curvature_measure(measure)
    return [v for v, m in measure.atoms.items() if m >= TWO_PI]


@dataclass(frozen=True)
class CertificationResult:
    status: Certification
    kappa: float
    witness: dict

    @property
    def bicb(self) -> bool:
        return self.status in (Certification.BICB, Certification.BOTH)

    @property
    def bica(self) -> bool:
        return self.status in (Certification.BICA, Certification.BOTH)


def certify(surface: TriangulatedSurface, kappa_bound: float) -> CertificationResult:
    """Decide omega >= kappa*mu (BICB) and omega <= kappa*mu (BICA).

    Atoms sit on mu-null sets, so each inequality splits into a sign condition
    on the atoms and a comparison of the density ``k`` with ``kappa_bound``.
    """
    measure = curvature_measure(surface)
    witness: dict = {}
    below = above = True
    if surface.k < kappa_bound:
        below = False
        witness["BICB"] = {"density": surface.k, "bound": kappa_bound}
    else:
        neg = [v for v, m in measure.atoms.items() if m < 0]
        if neg:
            below = False
            v = min(neg, key=lambda u: measure.atoms[u])
            witness["BICB"] = {"vertex": v, "atom": measure.atoms[v]}
    if surface.k > kappa_bound:
        above = False
        witness["BICA"] = {"density": surface.k, "bound": kappa_bound}
    else:
        pos = [v for v, m in measure.atoms.items() if m > 0]
        if pos:
            above = False
            v = max(pos, key=lambda u: measure.atoms[u])
            witness["BICA"] = {"vertex": v, "atom": measure.atoms[v]}
    return CertificationResult(Certification.from_flags(below, above), kappa_bound, witness)


def subdivide(surface: TriangulatedSurface) -> TriangulatedSurface:
    """1-to-4 split of every face at the M^2(k) midpoints of its sides.

    Corner ``i`` of face ``f`` becomes sub-face ``4f+i``; sub-face ``4f+3`` is
    the middle triangle. Midpoint vertices get fresh labels.
    """
    F = surface.n_faces
    k = surface.k
    next_label = max(surface.vertices) + 1
    mid_label: dict = {}
    for (f, i), (g, j) in surface.edge_pairs():
        mid_label[(f, i)] = mid_label[(g, j)] = next_label
        next_label += 1
    faces, lengths = [], []
    gluing = -np.ones((4 * F, 3, 2), dtype=np.int64)
    for f in range(F):
        l = surface.lengths[f]
        ang = surface.corner_angles[f]
        m = [mid_label[(f, i)] for i in range(3)]
        for i in range(3):
            # corner i, midpoints of sides prv(i) (between i and i+1) and nxt(i) (between i+2 and i)
            a = model_side(k, l[prv(i)] / 2, l[nxt(i)] / 2, ang[i])
            faces.append((int(surface.faces[f, i]), m[prv(i)], m[nxt(i)]))
            lengths.append((a, l[nxt(i)] / 2, l[prv(i)] / 2))
        mids = []
        for i in range(3):
            # side of the middle triangle opposite midpoint m[i] is parallel to side i
            mids.append(model_side(k, l[prv(i)] / 2, l[nxt(i)] / 2, ang[i]))
        faces.append((m[0], m[1], m[2]))
        lengths.append((mids[0], mids[1], mids[2]))
        # internal gluing: corner face 4f+i side 0 <-> middle face side i
        for i in range(3):
            gluing[4 * f + i, 0] = (4 * f + 3, i)
            gluing[4 * f + 3, i] = (4 * f + i, 0)
    for f in range(F):
        for i in range(3):
            g, j = surface.other(f, i)
            # side i of f runs corner i+1 -> i+2; first half lies in corner face i+1
            # (its side opposite corner 1, i.e. index 1... see mapping below)
            first = (4 * f + nxt(i), 2)
            second = (4 * f + prv(i), 1)
            g_first = (4 * g + nxt(j), 2)
            g_second = (4 * g + prv(j), 1)
            gluing[first] = g_second
            gluing[second] = g_first
    return TriangulatedSurface(np.array(faces), np.array(lengths), gluing, k, dict(surface.metadata))
