"""Exact kappa-cones: the cone over a circle of length theta with base curvature kappa.

Distances are obtained by unwrapping the cone into M^2(kappa): two points at
angular separation ``delta <= pi`` are joined by the model geodesic of the
unwrapped sector, otherwise the shortest path runs through the apex.
The curvature measure is ``(2*pi - theta) * delta_apex + kappa * mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .model_trig import model_angle, model_diameter, model_side


class Certification(str, Enum):
    BICB = "BICB"
    BICA = "BICA"
    BOTH = "both"
    NEITHER = "neither"

    @classmethod
    def from_flags(cls, below: bool, above: bool) -> "Certification":
        if below and above:
            return cls.BOTH
        if below:
            return cls.BICB
        if above:
            return cls.BICA
        return cls.NEITHER


@dataclass(frozen=True)
class ConePoint:
    r: float
    phi: float


@dataclass(frozen=True)
class ConeSpec:
    kappa: float
    theta: float

    def __post_init__(self):
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise ValueError(f"cone angle must be positive and finite, got {self.theta!r}")
        if not math.isfinite(self.kappa):
            raise ValueError("kappa must be finite")

    @property
    def max_radius(self) -> float:
        """Points must satisfy r < max_radius (half the model diameter for kappa > 0)."""
        return 0.5 * model_diameter(self.kappa)

    def point(self, r: float, phi: float) -> ConePoint:
        if r < 0:
            raise ValueError("radius must be non-negative")
        phi = math.fmod(phi, self.theta)
        if phi < 0:
            phi += self.theta
        if phi >= self.theta:
            phi = 0.0
        return ConePoint(float(r), float(phi))

    def _check(self, p: ConePoint):
        if p.r < 0 or not (0 <= p.phi < self.theta):
            raise ValueError(f"{p} violates cone point invariants for theta={self.theta!r}")
        if self.kappa > 0 and p.r >= self.max_radius:
            raise ValueError(
                f"radius {p.r!r} outside the cap r < {self.max_radius!r} for kappa={self.kappa!r}"
            )


def angular_separation(cone: ConeSpec, p: ConePoint, q: ConePoint) -> float:
    d = abs(p.phi - q.phi)
    return min(d, cone.theta - d)


def cone_distance(cone: ConeSpec, p: ConePoint, q: ConePoint) -> float:
    cone._check(p)
    cone._check(q)
    delta = angular_separation(cone, p, q)
    if delta <= math.pi:
        return model_side(cone.kappa, p.r, q.r, delta)
    # only reachable when theta > 2*pi
    return p.r + q.r


def cone_interpolate(cone: ConeSpec, p: ConePoint, q: ConePoint, t: float) -> ConePoint:
    """Point at arclength fraction ``t`` along the minimizing geodesic from p to q."""
    if not 0 <= t <= 1:
        raise ValueError(f"t={t!r} outside [0, 1]")
    if t == 0:
        return p
    if t == 1:
        return q
    d = cone_distance(cone, p, q)
    s = t * d
    delta = angular_separation(cone, p, q)
    if p.r == 0 or q.r == 0 or delta > math.pi or d == 0:
        # radial pieces: through the apex, or one endpoint is the apex
        if s <= p.r:
            return cone.point(p.r - s, p.phi)
        return cone.point(s - p.r, q.phi)
    # unwrap: apex O, p on the ray phi=0, q on the ray at angle delta
    angle_p = model_angle(cone.kappa, (q.r, p.r, d))
    r = model_side(cone.kappa, p.r, s, angle_p)
    psi = 0.0 if r == 0 else model_angle(cone.kappa, (s, p.r, r))
    psi = min(psi, delta)
    forward = (q.phi - p.phi) % cone.theta
    sign = 1.0 if forward <= cone.theta - forward else -1.0
    return cone.point(r, p.phi + sign * psi)


def cone_curvature_atom(cone: ConeSpec) -> float:
    return 2 * math.pi - cone.theta


def circle_left_turn(cone: ConeSpec, r: float, n: int = 64) -> float:
    """Total turn of the regular n-gon inscribed in the circle of radius r about the apex.

    The turn at each polygon vertex is pi minus its interior angle, the latter
    measured from cone distances as the sum of the two model angles split by
    the radial segment to the apex.
    """
    pts = [cone.point(r, cone.theta * i / n) for i in range(n)]
    apex = cone.point(0.0, 0.0)
    total = 0.0
    for i in range(n):
        prev, cur, nxt = pts[i - 1], pts[i], pts[(i + 1) % n]
        d_prev = cone_distance(cone, prev, cur)
        d_next = cone_distance(cone, cur, nxt)
        r_prev = cone_distance(cone, apex, prev)
        r_next = cone_distance(cone, apex, nxt)
        rc = cone_distance(cone, apex, cur)
        interior = model_angle(cone.kappa, (r_prev, rc, d_prev)) + model_angle(
            cone.kappa, (r_next, rc, d_next)
        )
        total += math.pi - interior
    return total


def cone_certify(cone: ConeSpec, kappa_bound: float) -> Certification:
    below = cone.kappa >= kappa_bound and cone.theta <= 2 * math.pi
    above = cone.kappa <= kappa_bound and cone.theta >= 2 * math.pi
    return Certification.from_flags(below, above)
