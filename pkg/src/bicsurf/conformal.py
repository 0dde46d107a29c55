"""Conformal factors from planar curvature measures.

For a measure made of point masses ``w_i`` at ``z_i`` plus a constant density
``c`` on the unit disc, the conformal factor is ``exp(u)`` with

    u(z) = -1/(2 pi) * ( sum_i w_i ln|z - z_i| + c * int_disc ln|z - s| dA(s) )

so a single mass ``w`` at the origin gives the metric ``|z|^(-w/2pi) |dz|``,
the flat cone of angle ``2 pi - w``. Distances ``d_u`` are computed on an
8-neighbour grid and then refined by optimizing the grid path as a
continuous polyline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

ATOM_EXCLUSION = 1e-3
QUAD_TOL = 1e-8


class PoleError(ValueError):
    """Potential requested at an atom."""


class DomainError(ValueError):
    """Point outside the unit disc."""


@dataclass(frozen=True)
class PlanarMeasure:
    atoms: tuple = ()  # ((x, y), mass) pairs
    density: float = 0.0

    def __post_init__(self):
        atoms = tuple(((float(p[0]), float(p[1])), float(m)) for p, m in self.atoms)
        pos = [p for p, _ in atoms]
        for p, m in atoms:
            if math.hypot(*p) >= 1:
                raise DomainError(f"atom {p} outside the open unit disc")
            if not math.isfinite(m):
                raise ValueError("atom masses must be finite")
        if len(set(pos)) != len(pos):
            raise ValueError("atom positions must be distinct")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "density", float(self.density))

    @classmethod
    def single_atom(cls, mass: float, at=(0.0, 0.0)) -> "PlanarMeasure":
        return cls((((at[0], at[1]), mass),))

    def to_json(self):
        return {"atoms": [{"position": list(p), "mass": m} for p, m in self.atoms], "density": self.density}

    @classmethod
    def from_json(cls, data):
        return cls(tuple((tuple(a["position"]), a["mass"]) for a in data.get("atoms", [])), data.get("density", 0.0))


def _inner_log_integral(R):
    """int_0^R ln(rho) rho d rho."""
    R = np.asarray(R, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 0.5 * R * R * np.log(R) - 0.25 * R * R
    return np.where(R > 0, out, 0.0)


def _ray_to_circle(x, y, phi):
    """Distance from (x, y) inside the unit disc to the unit circle in direction phi."""
    b = x * np.cos(phi) + y * np.sin(phi)
    return -b + np.sqrt(np.maximum(b * b + 1.0 - (x * x + y * y), 0.0))


def disc_log_integral(z) -> float:
    """int over the unit disc of ln|z - s| dA(s), by adaptive polar quadrature centred at z.

    The log singularity at z is integrated in closed form along each ray;
    only the smooth angular integral is left to the quadrature.
    """
    x, y = float(z[0]), float(z[1])
    if x * x + y * y > 1:
        raise DomainError("density integral is implemented for points of the closed disc")
    val, _ = quad(lambda phi: float(_inner_log_integral(_ray_to_circle(x, y, phi))), 0.0, 2 * math.pi, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return val


def disc_log_integral_array(x, y, n_angles: int = 256):
    """Vectorized version using the periodic trapezoid rule (spectrally accurate inside the disc)."""
    x = np.asarray(x, dtype=float)[..., None]
    y = np.asarray(y, dtype=float)[..., None]
    phi = np.linspace(0.0, 2 * math.pi, n_angles, endpoint=False)
    return _inner_log_integral(_ray_to_circle(x, y, phi)).mean(axis=-1) * 2 * math.pi


def potential(measure: PlanarMeasure, z) -> float:
    x, y = float(z[0]), float(z[1])
    total = 0.0
    for (ax, ay), m in measure.atoms:
        r = math.hypot(x - ax, y - ay)
        if r == 0:
            raise PoleError(f"potential undefined at the atom {(ax, ay)}")
        total += m * math.log(r)
    if measure.density != 0:
        total += measure.density * disc_log_integral((x, y))
    return -total / (2 * math.pi)


def potential_array(measure: PlanarMeasure, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    total = np.zeros(np.broadcast(x, y).shape)
    for (ax, ay), m in measure.atoms:
        with np.errstate(divide="ignore"):
            total = total + m * np.log(np.hypot(x - ax, y - ay))
    if measure.density != 0:
        total = total + measure.density * disc_log_integral_array(x, y)
    return -total / (2 * math.pi)


def potential_gradient(measure: PlanarMeasure, x, y, h: float = 1e-6):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gx = np.zeros(np.broadcast(x, y).shape)
    gy = np.zeros_like(gx)
    for (ax, ay), m in measure.atoms:
        dx, dy = x - ax, y - ay
        r2 = dx * dx + dy * dy
        gx = gx - m * dx / r2 / (2 * math.pi)
        gy = gy - m * dy / r2 / (2 * math.pi)
    if measure.density != 0:
        c = -measure.density / (2 * math.pi)
        gx = gx + c * (disc_log_integral_array(x + h, y) - disc_log_integral_array(x - h, y)) / (2 * h)
        gy = gy + c * (disc_log_integral_array(x, y + h) - disc_log_integral_array(x, y - h)) / (2 * h)
    return gx, gy


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)
_GL_T = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def polyline_length(measure: PlanarMeasure, pts: np.ndarray, with_grad: bool = False):
    """int e^u |dz| along a polyline (Gauss-Legendre per segment) and optionally its gradient."""
    a, b = pts[:-1], pts[1:]
    d = b - a
    seg = np.hypot(d[:, 0], d[:, 1])
    t = _GL_T[None, :]
    qx = a[:, :1] + t * d[:, :1]
    qy = a[:, 1:2] + t * d[:, 1:2]
    e = np.exp(potential_array(measure, qx, qy))
    I0 = e @ _GL_W
    length = float(np.sum(seg * I0))
    if not with_grad:
        return length
    gx, gy = potential_gradient(measure, qx, qy)
    w = _GL_W[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(seg[:, None] > 0, d / seg[:, None], 0.0)
    # d/da and d/db of seg * int_0^1 e^u(a + t(b - a)) dt
    ga = -unit * I0[:, None] + seg[:, None] * np.stack([(e * gx * (1 - t) * w).sum(1), (e * gy * (1 - t) * w).sum(1)], axis=1)
    gb = unit * I0[:, None] + seg[:, None] * np.stack([(e * gx * t * w).sum(1), (e * gy * t * w).sum(1)], axis=1)
    grad = np.zeros_like(pts)
    grad[:-1] += ga
    grad[1:] += gb
    return length, grad


@dataclass
class ConformalGrid:
    measure: PlanarMeasure
    n: int
    nodes: np.ndarray = field(init=False, repr=False)
    u: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grid resolution must be at least 2")
        # n intervals per axis on [-1, 1], so doubling n nests the grids
        n = self.n + 1
        self.h = 2.0 / self.n
        xs = np.linspace(-1.0, 1.0, n)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        keep = X * X + Y * Y < 1.0
        for (ax, ay), _ in self.measure.atoms:
            keep &= np.hypot(X - ax, Y - ay) > ATOM_EXCLUSION
        index = -np.ones((n, n), dtype=np.int64)
        index[keep] = np.arange(int(keep.sum()))
        self.index = index
        self.nodes = np.column_stack([X[keep], Y[keep]])
        self.u = potential_array(self.measure, self.nodes[:, 0], self.nodes[:, 1])
        rows, cols, w = [], [], []
        for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
            i0 = slice(max(0, -di), n - max(0, di))
            j0 = slice(max(0, -dj), n - max(0, dj))
            i1 = slice(max(0, di), n - max(0, -di) if di < 0 else n)
            j1 = slice(max(0, dj), n + dj if dj < 0 else n)
            A = index[i0, j0]
            B = index[i1, j1]
            ok = (A >= 0) & (B >= 0)
            a, b = A[ok], B[ok]
            rows.append(a)
            cols.append(b)
            w.append(self._simpson(self.nodes[a], self.nodes[b], self.u[a], self.u[b]))
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        wt = np.concatenate(w)
        self._edges = (r, c, wt)

    def _simpson(self, A, B, ua, ub):
        mid = 0.5 * (A + B)
        um = potential_array(self.measure, mid[:, 0], mid[:, 1])
        seg = np.hypot(*(B - A).T)
        return seg * (np.exp(ua) + 4 * np.exp(um) + np.exp(ub)) / 6.0

    def _attach(self, z):
        """Extra-node edges from z to grid nodes within two grid spacings."""
        z = np.asarray(z, dtype=float)
        near = np.nonzero(np.hypot(*(self.nodes - z).T) <= 2.0 * self.h)[0]
        if len(near) == 0:
            raise DomainError(f"no grid node near {tuple(z)}")
        uz = potential_array(self.measure, z[0], z[1])
        ZA = np.repeat(z[None, :], len(near), axis=0)
        return near, self._simpson(ZA, self.nodes[near], np.full(len(near), uz), self.u[near])

    def grid_path(self, z1, z2):
        """Grid distance and node path between two off-grid points."""
        N = len(self.nodes)
        n1, w1 = self._attach(z1)
        n2, w2 = self._attach(z2)
        r, c, w = self._edges
        R = np.concatenate([r, c, np.full(len(n1), N), n1, np.full(len(n2), N + 1), n2])
        C = np.concatenate([c, r, n1, np.full(len(n1), N), n2, np.full(len(n2), N + 1)])
        W = np.concatenate([w, w, w1, w1, w2, w2])
        mat = coo_matrix((W, (R, C)), shape=(N + 2, N + 2)).tocsr()
        dist, pred = dijkstra(mat, directed=True, indices=N, return_predecessors=True)
        if not np.isfinite(dist[N + 1]):
            raise DomainError("endpoints are not connected in the grid")
        seq = []
        k = pred[N + 1]
        while k != N and k >= 0:
            seq.append(k)
            k = pred[k]
        seq.reverse()
        pts = np.vstack([np.asarray(z1, float)[None, :], self.nodes[seq], np.asarray(z2, float)[None, :]])
        return float(dist[N + 1]), pts

    def distance(self, z1, z2, polish: bool = True, n_points: int = 48) -> float:
        for z in (z1, z2):
            if math.hypot(z[0], z[1]) >= 1:
                raise DomainError(f"{tuple(z)} outside the unit disc")
        if math.hypot(z1[0] - z2[0], z1[1] - z2[1]) == 0:
            return 0.0
        d_grid, pts = self.grid_path(z1, z2)
        if not polish:
            return d_grid
        return min(d_grid, _polish(self.measure, pts, n_points))


def _resample(pts: np.ndarray, m: int) -> np.ndarray:
    seg = np.hypot(*np.diff(pts, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    target = np.linspace(0.0, s[-1], m)
    return np.column_stack([np.interp(target, s, pts[:, 0]), np.interp(target, s, pts[:, 1])])


def _polish(measure: PlanarMeasure, pts: np.ndarray, m: int) -> float:
    """Shorten the grid path as a free polyline with fixed endpoints."""
    P = _resample(pts, m)
    z1, z2 = P[0].copy(), P[-1].copy()

    def f(flat):
        Q = np.vstack([z1, flat.reshape(-1, 2), z2])
        # keep the iterate inside the disc
        if np.any(np.hypot(Q[:, 0], Q[:, 1]) >= 1):
            return 1e6, np.zeros_like(flat)
        L, g = polyline_length(measure, Q, with_grad=True)
        if not np.isfinite(L):
            return 1e6, np.zeros_like(flat)
        return L, g[1:-1].ravel()

    res = minimize(f, P[1:-1].ravel(), jac=True, method="L-BFGS-B", options={"maxiter": 500, "ftol": 1e-13, "gtol": 1e-10})
    Q = np.vstack([z1, res.x.reshape(-1, 2), z2])
    return polyline_length(measure, Q)


_GRIDS: dict = {}


def conformal_grid(measure: PlanarMeasure, n: int) -> ConformalGrid:
    key = (measure, n)
    g = _GRIDS.get(key)
    if g is None:
        g = ConformalGrid(measure, n)
        _GRIDS.clear()
        _GRIDS[key] = g
    return g


def conformal_distance(measure: PlanarMeasure, z1, z2, n: int = 256, polish: bool = True) -> float:
    return conformal_grid(measure, n).distance(z1, z2, polish=polish)


@dataclass(frozen=True)
class CuspReport:
    epsilons: tuple
    lengths: tuple
    increments: tuple
    growth_rate: float  # fitted slope of length against ln(1/eps)


def cusp_divergence(measure: PlanarMeasure, epsilons, r0: float = 1.0, direction: float = 0.0) -> CuspReport:
    """Lengths of the radial segments from eps to r0 towards an atom at the origin.

    The integral of e^u dr is taken in the variable t = ln r, where the
    integrand e^(u + t) stays bounded for masses up to 2*pi.
    """
    eps = [float(e) for e in epsilons]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be strictly decreasing")
    cx, cy = math.cos(direction), math.sin(direction)

    def integrand(t):
        r = math.exp(t)
        return math.exp(potential(measure, (r * cx, r * cy)) + t)

    lengths = []
    prev_t, acc = math.log(r0), 0.0
    for e in eps:
        t = math.log(e)
        part, _ = quad(integrand, t, prev_t, epsabs=1e-13, epsrel=1e-13, limit=200)
        acc += part
        lengths.append(acc)
        prev_t = t
    incs = tuple(b - a for a, b in zip(lengths, lengths[1:]))
    x = np.log(1.0 / np.asarray(eps))
    slope = float(np.polyfit(x, lengths, 1)[0]) if len(eps) > 1 else math.nan
    return CuspReport(tuple(eps), tuple(lengths), incs, slope)
