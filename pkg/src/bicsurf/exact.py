"""Exact single-source geodesic distances on flat triangulated surfaces.

Continuous Dijkstra over *windows*: intervals of a face side together with a
pseudo-source (the unfolded image of the source or of a saddle vertex) from
which every point of the interval is reached by a straight segment. Windows
are processed in order of their minimal distance and propagated across the
opposite face; a window is dropped once some vertex offers a path that is no
longer anywhere on its interval. Vertices of cone angle at least 2*pi spawn
new pseudo-sources because geodesics may pass through them.

Windows are stored in the frame of the face they enter. A side ``slot`` of
face ``f`` runs from corner ``slot+1`` (A) to corner ``slot+2`` (B); the
window interval is ``[b0, b1]`` measured from A.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .paths import GeodesicPath, build_path
from .points import Layout, SurfacePoint, layout_of, location, star
from .surface import TWO_PI, TriangulatedSurface, nxt, prv

PRUNE_EPS = 1e-12


class UnsupportedModeError(ValueError):
    """Exact solver requested on a surface with curved faces."""


class _Mesh:
    """Flat per-face geometry as plain floats for the inner loop."""

    def __init__(self, surface: TriangulatedSurface, layout: Layout):
        F = surface.n_faces
        self.F = F
        self.P = [[(float(x), float(y)) for x, y in layout.corners[f]] for f in range(F)]
        self.L = surface.lengths.tolist()
        self.label = surface.faces.tolist()
        self.nbr = [[surface.other(f, i) for i in range(3)] for f in range(F)]
        ang = surface.corner_angles
        theta: dict[int, float] = {}
        for f in range(F):
            for i in range(3):
                v = self.label[f][i]
                theta[v] = theta.get(v, 0.0) + float(ang[f, i])
        self.spawns = {v: t >= TWO_PI - 1e-9 for v, t in theta.items()}
        self.corners_of = surface.corners_of
        self.scale = float(surface.lengths.mean())
        # rigid map from the frame of f into the frame of its neighbour across slot i:
        # f's corner i+1 goes to g's corner j+2 and f's corner i+2 to g's corner j+1
        self.T = []
        for f in range(F):
            row = []
            for i in range(3):
                g, j = self.nbr[f][i]
                a0, a1 = self.P[f][nxt(i)], self.P[f][prv(i)]
                c0, c1 = self.P[g][prv(j)], self.P[g][nxt(j)]
                phi = math.atan2(c1[1] - c0[1], c1[0] - c0[0]) - math.atan2(a1[1] - a0[1], a1[0] - a0[0])
                cs, sn = math.cos(phi), math.sin(phi)
                tx = c0[0] - (cs * a0[0] - sn * a0[1])
                ty = c0[1] - (sn * a0[0] + cs * a0[1])
                row.append((cs, sn, tx, ty))
            self.T.append(row)


def _mesh_of(surface: TriangulatedSurface) -> _Mesh:
    m = surface.__dict__.get("_flat_mesh")
    if m is None:
        m = _Mesh(surface, layout_of(surface))
        surface.__dict__["_flat_mesh"] = m
    return m


def _apply(T, p):
    cs, sn, tx, ty = T
    return (cs * p[0] - sn * p[1] + tx, sn * p[0] + cs * p[1] + ty)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _seg_dist(sx, sy, ax, ay, bx, by):
    ux, uy = bx - ax, by - ay
    ll = ux * ux + uy * uy
    t = 0.0 if ll == 0 else ((sx - ax) * ux + (sy - ay) * uy) / ll
    t = min(max(t, 0.0), 1.0)
    return math.hypot(sx - ax - t * ux, sy - ay - t * uy)


class _Window:
    __slots__ = ("face", "slot", "b0", "b1", "sx", "sy", "sigma", "parent", "root")

    def __init__(self, face, slot, b0, b1, sx, sy, sigma, parent, root):
        self.face = face
        self.slot = slot
        self.b0 = b0
        self.b1 = b1
        self.sx = sx
        self.sy = sy
        self.sigma = sigma
        self.parent = parent
        self.root = root


class ExactDistanceField:
    """All distances from one source point on a flat surface."""

    def __init__(self, surface: TriangulatedSurface, source: SurfacePoint, max_windows: int = 5_000_000):
        layout = layout_of(surface)
        if not layout.flat:
            raise UnsupportedModeError(
                f"exact solver supports k = 0 only (got k={surface.k!r}); use approx_distance"
            )
        self.surface = surface
        self.layout = layout
        self.source = source
        self.mesh = _mesh_of(surface)
        self.max_windows = max_windows
        self.eps = PRUNE_EPS * max(1.0, self.mesh.scale)
        self.n_created = 0
        self.n_processed = 0
        self._propagate()
        self._face_arrays = {}

    # ------------------------------------------------------------------ setup
    def _propagate(self):
        m = self.mesh
        self.vdist = {v: math.inf for v in m.spawns}
        self.vorigin = {}
        self.by_face = [[] for _ in range(m.F)]
        self._heap = []
        self._count = 0
        self.star = [(f, (float(x[0]), float(x[1]))) for f, x in star(self.layout, self.source)]
        loc = location(self.source)
        if loc[0] == "vertex":
            v = m.label[self.source.face][loc[1]]
            self.vdist[v] = 0.0
            self.vorigin[v] = ("source",)
        for idx, (f, p) in enumerate(self.star):
            for i in range(3):
                c = m.P[f][i]
                self._relax_vertex(m.label[f][i], math.hypot(c[0] - p[0], c[1] - p[1]), ("star", idx, i))
            for i in range(3):
                A, B = m.P[f][nxt(i)], m.P[f][prv(i)]
                if _seg_dist(p[0], p[1], A[0], A[1], B[0], B[1]) <= 1e-12 * m.L[f][i]:
                    continue
                self._cross_side(f, i, 0.0, m.L[f][i], p, 0.0, None, ("star", idx))
        self._run()

    def _relax_vertex(self, v, d, origin):
        if d < self.vdist[v] - self.eps:
            self.vdist[v] = d
            self.vorigin[v] = origin
            if self.mesh.spawns[v]:
                self._push(d, ("vertex", v, d))
            return True
        return False

    def _push(self, key, item):
        self._count += 1
        heapq.heappush(self._heap, (key, self._count, item))

    def _cross_side(self, f, i, lo, hi, s, sigma, parent, root):
        """Window on side i of face f (interval [lo, hi] in f's parametrisation)
        handed to the neighbour face."""
        m = self.mesh
        g, j = m.nbr[f][i]
        L = m.L[f][i]
        b0, b1 = max(L - hi, 0.0), min(L - lo, L)
        if b1 <= b0:
            return
        sx, sy = _apply(m.T[f][i], s)
        w = _Window(g, j, b0, b1, sx, sy, sigma, parent, root)
        if self._dominated(w):
            return
        Pg = m.P[g]
        A, B = Pg[nxt(j)], Pg[prv(j)]
        ux, uy = (B[0] - A[0]) / L, (B[1] - A[1]) / L
        key = sigma + _seg_dist(sx, sy, A[0] + b0 * ux, A[1] + b0 * uy, A[0] + b1 * ux, A[1] + b1 * uy)
        self.n_created += 1
        if self.n_created > self.max_windows:
            raise RuntimeError(f"window budget {self.max_windows} exhausted")
        self._push(key, w)

    def _dominated(self, w: _Window) -> bool:
        m = self.mesh
        g, j = w.face, w.slot
        lab = m.label[g]
        Pg = m.P[g]
        L = m.L[g][j]
        A, B, C = Pg[nxt(j)], Pg[prv(j)], Pg[j]
        ux, uy = (B[0] - A[0]) / L, (B[1] - A[1]) / L
        x0 = (A[0] + w.b0 * ux, A[1] + w.b0 * uy)
        x1 = (A[0] + w.b1 * ux, A[1] + w.b1 * uy)
        sx, sy, sigma = w.sx, w.sy, w.sigma
        eps = self.eps
        d0 = math.hypot(sx - x0[0], sy - x0[1])
        d1 = math.hypot(sx - x1[0], sy - x1[1])
        dA = self.vdist[lab[nxt(j)]]
        if dA + w.b1 < sigma + d1 - eps:
            return True
        dB = self.vdist[lab[prv(j)]]
        if dB + (L - w.b0) < sigma + d0 - eps:
            return True
        dC = self.vdist[lab[j]]
        if dC < math.inf:
            gmax = max(
                math.hypot(C[0] - x0[0], C[1] - x0[1]) - d0,
                math.hypot(C[0] - x1[0], C[1] - x1[1]) - d1,
            )
            # |C - x| - |s - x| over the interval peaks where x lines up with C and the mirror of s
            px, py = sx - A[0], sy - A[1]
            along = px * ux + py * uy
            rx, ry = A[0] + 2 * along * ux - px, A[1] + 2 * along * uy - py
            wx, wy = C[0] - rx, C[1] - ry
            den = _cross(wx, wy, ux, uy)
            if den != 0:
                t = _cross(wx, wy, rx - A[0], ry - A[1]) / den
                if w.b0 < t < w.b1:
                    xs = (A[0] + t * ux, A[1] + t * uy)
                    if math.hypot(C[0] - xs[0], C[1] - xs[1]) >= math.hypot(rx - xs[0], ry - xs[1]):
                        gmax = max(gmax, math.hypot(wx, wy))
            if dC + gmax < sigma - eps:
                return True
        return False

    # ------------------------------------------------------------- main loop
    def _run(self):
        m = self.mesh
        heap = self._heap
        while heap:
            _, _, item = heapq.heappop(heap)
            if isinstance(item, tuple):
                _, v, d = item
                if d > self.vdist[v]:
                    continue
                self._spawn(v, d)
                continue
            w = item
            root = w.root
            if root[0] == "vertex" and self.vdist[root[1]] < root[2] - self.eps:
                continue
            if self._dominated(w):
                continue
            self.n_processed += 1
            self.by_face[w.face].append(w)
            self._propagate_window(w)
        self._heap = None

    def _spawn(self, v, d):
        m = self.mesh
        root = ("vertex", v, d)
        for f, i in m.corners_of[v]:
            c = m.P[f][i]
            for k in (nxt(i), prv(i)):
                # straight continuation along a side
                self._relax_vertex(m.label[f][k], d + m.L[f][3 - i - k], ("side", v, f, i, k))
            self._cross_side(f, i, 0.0, m.L[f][i], c, d, None, root + (f, i))

    def _propagate_window(self, w: _Window):
        m = self.mesh
        g, j = w.face, w.slot
        Pg = m.P[g]
        L = m.L[g][j]
        A, B, C = Pg[nxt(j)], Pg[prv(j)], Pg[j]
        ux, uy = (B[0] - A[0]) / L, (B[1] - A[1]) / L
        sx, sy = w.sx, w.sy
        cx, cy = C[0] - sx, C[1] - sy
        den = _cross(cx, cy, ux, uy)
        if abs(den) <= 1e-300:
            return
        tC = _cross(cx, cy, sx - A[0], sy - A[1]) / den
        tol = 1e-12 * L
        s = (sx, sy)
        if w.b0 - tol <= tC <= w.b1 + tol:
            self._relax_vertex(m.label[g][j], w.sigma + math.hypot(cx, cy), ("window", w))

        def hit(t, E, F, LEF):
            # parameter along E->F where the ray from s through A + t*u crosses it
            xx, xy = A[0] + t * ux - sx, A[1] + t * uy - sy
            ex, ey = (F[0] - E[0]) / LEF, (F[1] - E[1]) / LEF
            dd = _cross(xx, xy, ex, ey)
            if dd == 0:
                return None
            lam = _cross(xx, xy, sx - E[0], sy - E[1]) / dd
            return min(max(lam, 0.0), LEF)

        # side C->A is slot j+2 of g, side B->C is slot j+1
        if w.b0 < tC:
            sl = prv(j)
            LCA = m.L[g][sl]
            lo = hit(w.b0, C, A, LCA)
            hi = 0.0 if tC <= w.b1 else hit(w.b1, C, A, LCA)
            if lo is None:
                lo = LCA
            if hi is None:
                hi = 0.0
            a, b = min(lo, hi), max(lo, hi)
            if b > a:
                self._cross_side(g, sl, a, b, s, w.sigma, w, w.root)
        if tC < w.b1:
            sl = nxt(j)
            LBC = m.L[g][sl]
            hi = hit(w.b1, B, C, LBC)
            lo = LBC if tC >= w.b0 else hit(w.b0, B, C, LBC)
            if hi is None:
                hi = 0.0
            if lo is None:
                lo = LBC
            a, b = min(lo, hi), max(lo, hi)
            if b > a:
                self._cross_side(g, sl, a, b, s, w.sigma, w, w.root)

    # --------------------------------------------------------------- queries
    def _arrays(self, g):
        arr = self._face_arrays.get(g)
        if arr is None:
            m = self.mesh
            ws = self.by_face[g]
            rows = []
            for w in ws:
                A, B = m.P[g][nxt(w.slot)], m.P[g][prv(w.slot)]
                L = m.L[g][w.slot]
                rows.append((w.sx, w.sy, w.sigma, A[0], A[1], (B[0] - A[0]) / L, (B[1] - A[1]) / L, w.b0, w.b1, L))
            arr = np.array(rows, dtype=float).reshape(-1, 10)
            self._face_arrays[g] = (arr, ws)
        return self._face_arrays[g]

    def _best_in_face(self, g, t):
        """Best candidate for position t of face g: (distance, kind, data)."""
        m = self.mesh
        tx, ty = t
        best = (math.inf, None, None)
        for idx, (f, p) in enumerate(self.star):
            if f == g:
                d = math.hypot(tx - p[0], ty - p[1])
                if d < best[0]:
                    best = (d, "star", idx)
        for i in range(3):
            dv = self.vdist[m.label[g][i]]
            if dv < math.inf:
                c = m.P[g][i]
                d = dv + math.hypot(tx - c[0], ty - c[1])
                if d < best[0] - self.eps:
                    best = (d, "vertex", i)
        arr, ws = self._arrays(g)
        if len(ws):
            sx, sy, sig, ax, ay, ux, uy, b0, b1, L = arr.T
            wx, wy = tx - sx, ty - sy
            den = wx * uy - wy * ux
            with np.errstate(divide="ignore", invalid="ignore"):
                tau = (wx * (sy - ay) - wy * (sx - ax)) / den
            tol = 1e-9 * L
            ok = (den != 0) & (tau >= b0 - tol) & (tau <= b1 + tol)
            if ok.any():
                d = np.where(ok, sig + np.hypot(wx, wy), np.inf)
                k = int(np.argmin(d))
                if d[k] < best[0] - self.eps:
                    best = (float(d[k]), "window", k)
        return best

    def distance(self, q: SurfacePoint) -> float:
        t = self.layout.position(q)
        return self._best_in_face(q.face, (float(t[0]), float(t[1])))[0]

    def distances(self, points) -> np.ndarray:
        return np.array([self.distance(q) for q in points])

    def path(self, q: SurfacePoint) -> GeodesicPath:
        """One minimizing path from the source to q."""
        t = self.layout.position(q)
        t = (float(t[0]), float(t[1]))
        d, kind, data = self._best_in_face(q.face, t)
        if not math.isfinite(d):
            raise RuntimeError("target unreachable")
        pieces = []  # built backwards as (face, start, end)
        if kind == "star":
            pieces.append((q.face, self.star[data][1], t))
        elif kind == "vertex":
            pieces.append((q.face, self.mesh.P[q.face][data], t))
            pieces.extend(self._vertex_pieces(self.mesh.label[q.face][data]))
        else:
            w = self._arrays(q.face)[1][data]
            pieces.extend(self._window_pieces(w, t))
        pieces.reverse()
        out = [(f, np.array(a), np.array(b)) for f, a, b in pieces]
        return build_path(self.layout, self.source, q, out, d)

    def _window_pieces(self, w: _Window, t):
        """Backwards pieces of the straight run from w's pseudo-source to t (in w.face)."""
        m = self.mesh
        pieces = []
        end = t
        while w is not None:
            g, j = w.face, w.slot
            A, B = m.P[g][nxt(j)], m.P[g][prv(j)]
            L = m.L[g][j]
            ux, uy = (B[0] - A[0]) / L, (B[1] - A[1]) / L
            wx, wy = end[0] - w.sx, end[1] - w.sy
            den = _cross(wx, wy, ux, uy)
            tau = w.b0 if den == 0 else _cross(wx, wy, w.sx - A[0], w.sy - A[1]) / den
            tau = min(max(tau, 0.0), L)
            cross_pt = (A[0] + tau * ux, A[1] + tau * uy)
            pieces.append((g, cross_pt, end))
            # the same point in the frame of the face the window came from
            h, i = m.nbr[g][j]
            Ah = m.P[h][nxt(i)]
            Bh = m.P[h][prv(i)]
            r = (L - tau) / L
            end = (Ah[0] + r * (Bh[0] - Ah[0]), Ah[1] + r * (Bh[1] - Ah[1]))
            if w.parent is None:
                root = w.root
                if root[0] == "star":
                    pieces.append((h, self.star[root[1]][1], end))
                else:
                    _, v, _, f, i0 = root
                    pieces.append((f, m.P[f][i0], end))
                    pieces.extend(self._vertex_pieces(v))
                break
            w = w.parent
        return pieces

    def _vertex_pieces(self, v):
        m = self.mesh
        pieces = []
        for _ in range(10 * len(self.vdist) + 10):
            origin = self.vorigin[v]
            kind = origin[0]
            if kind == "source":
                return pieces
            if kind == "star":
                _, idx, i = origin
                f, p = self.star[idx]
                pieces.append((f, p, m.P[f][i]))
                return pieces
            if kind == "side":
                _, u, f, i, k = origin
                pieces.append((f, m.P[f][i], m.P[f][k]))
                v = u
                continue
            w = origin[1]
            pieces.extend(self._window_pieces(w, m.P[w.face][w.slot]))
            return pieces
        raise RuntimeError("vertex origin chain does not terminate")

    def stats(self) -> dict:
        return {"windows_created": self.n_created, "windows_kept": self.n_processed}


def exact_distance(surface: TriangulatedSurface, p: SurfacePoint, q: SurfacePoint):
    """Exact intrinsic distance and one minimizing path on a flat surface."""
    field = ExactDistanceField(surface, p)
    path = field.path(q)
    return path.length, path
