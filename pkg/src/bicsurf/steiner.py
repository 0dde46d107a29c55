"""Upper-bound distances through Steiner points placed on face sides.

Each side of length ``L`` carries ``refinement * ceil(L / mean_side)``
equal-arclength intervals, so doubling the refinement keeps every previous
Steiner point (nested sets). Any two points on the boundary of a common face
are joined by the model geodesic inside that face; shortest paths in this
graph are realisable curves on the surface and hence upper bounds.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .points import SurfacePoint, layout_of, star
from .surface import TriangulatedSurface


class SteinerGraph:
    def __init__(self, surface: TriangulatedSurface, refinement: int):
        if int(refinement) != refinement or refinement < 1:
            raise ValueError("refinement must be a positive integer")
        self.surface = surface
        self.refinement = int(refinement)
        layout = layout_of(surface)
        self.layout = layout
        mean = float(surface.lengths.mean())
        labels = surface.vertices
        node_of_vertex = {v: n for n, v in enumerate(labels)}
        positions_face: list[list] = [[] for _ in range(surface.n_faces)]  # (node id, layout position)
        n_nodes = len(labels)
        for f in range(surface.n_faces):
            for i in range(3):
                positions_face[f].append((node_of_vertex[int(surface.faces[f, i])], layout.corners[f, i]))
        for (f, i), (g, j) in surface.edge_pairs():
            L = float(surface.lengths[f, i])
            m = self.refinement * max(1, math.ceil(L / mean - 1e-12))
            for k in range(1, m):
                u = k / m
                pf = layout.position(layout.edge_point(f, i, u))
                pg = layout.position(layout.edge_point(g, j, 1.0 - u))
                positions_face[f].append((n_nodes, pf))
                positions_face[g].append((n_nodes, pg))
                n_nodes += 1
        self.n_nodes = n_nodes
        self.face_nodes = []
        rows, cols, vals = [], [], []
        for f in range(surface.n_faces):
            ids = np.array([n for n, _ in positions_face[f]])
            pos = np.array([p for _, p in positions_face[f]])
            self.face_nodes.append((ids, pos))
            D = layout.distance(pos[:, None, :], pos[None, :, :])
            a, b = np.triu_indices(len(ids), 1)
            rows.append(ids[a])
            cols.append(ids[b])
            vals.append(D[a, b])
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        v = np.concatenate(vals)
        lo, hi = np.minimum(r, c), np.maximum(r, c)
        keep = lo != hi
        lo, hi, v = lo[keep], hi[keep], v[keep]
        order = np.lexsort((v, hi, lo))
        lo, hi, v = lo[order], hi[order], v[order]
        first = np.ones(len(lo), dtype=bool)
        first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
        lo, hi, v = lo[first], hi[first], v[first]
        # zero-length edges only arise between coincident labels; keep them explicit
        v = np.maximum(v, 1e-300)
        self._edges = (lo, hi, v)

    def _matrix(self, extra):
        """Symmetric adjacency including an extra node connected by ``extra``."""
        lo, hi, v = self._edges
        n = self.n_nodes
        ex_ids, ex_w = extra
        order = np.lexsort((ex_w, ex_ids))
        ex_ids, ex_w = ex_ids[order], ex_w[order]
        first = np.ones(len(ex_ids), dtype=bool)
        first[1:] = ex_ids[1:] != ex_ids[:-1]
        ex_ids, ex_w = ex_ids[first], ex_w[first]
        r = np.concatenate([lo, hi, np.full(len(ex_ids), n)])
        c = np.concatenate([hi, lo, ex_ids])
        w = np.concatenate([v, v, np.maximum(ex_w, 1e-300)])
        return coo_matrix((w, (r, c)), shape=(n + 1, n + 1)).tocsr()


def steiner_graph(surface: TriangulatedSurface, refinement: int) -> SteinerGraph:
    cache = surface.__dict__.setdefault("_steiner", {})
    g = cache.get(refinement)
    if g is None:
        g = SteinerGraph(surface, refinement)
        cache[refinement] = g
    return g


class SteinerField:
    """Upper-bound distances from one source via the Steiner graph."""

    def __init__(self, surface: TriangulatedSurface, source: SurfacePoint, refinement: int = 8):
        self.graph = steiner_graph(surface, refinement)
        self.layout = self.graph.layout
        self.source = source
        self.star = star(self.layout, source)
        ids, ws = [], []
        for f, x in self.star:
            fid, pos = self.graph.face_nodes[f]
            ids.append(fid)
            ws.append(self.layout.distance(pos, x[None, :]))
        ids = np.concatenate(ids)
        ws = np.concatenate(ws)
        mat = self.graph._matrix((ids, ws))
        self.node_dist = dijkstra(mat, directed=False, indices=self.graph.n_nodes)[: self.graph.n_nodes]

    def distance(self, q: SurfacePoint) -> float:
        best = math.inf
        for g, y in star(self.layout, q):
            fid, pos = self.graph.face_nodes[g]
            d = self.node_dist[fid] + self.layout.distance(pos, y[None, :])
            best = min(best, float(d.min()))
            for f, x in self.star:
                if f == g:
                    best = min(best, float(self.layout.distance(x, y)))
        return best

    def distances(self, points) -> np.ndarray:
        return np.array([self.distance(q) for q in points])


def approx_distance(surface: TriangulatedSurface, p: SurfacePoint, q: SurfacePoint, refinement: int = 8) -> float:
    return SteinerField(surface, p, refinement).distance(q)
