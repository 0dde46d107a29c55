"""Polyline geodesics on triangulated surfaces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .points import Layout, SurfacePoint


@dataclass(frozen=True)
class PathSegment:
    face: int
    start: SurfacePoint
    end: SurfacePoint
    length: float


@dataclass(frozen=True)
class GeodesicPath:
    source: SurfacePoint
    target: SurfacePoint
    segments: tuple
    length: float

    @property
    def segment_sum(self) -> float:
        return math.fsum(s.length for s in self.segments)

    def to_json(self):
        return {
            "length": self.length,
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "segments": [
                {"face": s.face, "start": list(s.start.bary), "end": list(s.end.bary), "length": s.length}
                for s in self.segments
            ],
        }


def build_path(layout: Layout, source, target, pieces, length: float) -> GeodesicPath:
    """Assemble a path from (face, start_xy, end_xy) pieces given in layout coordinates."""
    segs = []
    for face, a, b in pieces:
        ell = float(layout.distance(a, b))
        if ell == 0.0 and len(pieces) > 1:
            continue
        segs.append(PathSegment(face, layout.point(face, a), layout.point(face, b), ell))
    return GeodesicPath(source, target, tuple(segs), length)


def interpolate_model(layout: Layout, x: np.ndarray, y: np.ndarray, u: float) -> np.ndarray:
    """Point at arclength fraction u on the model geodesic from x to y."""
    if layout.flat:
        return (1 - u) * x + u * y
    d = float(layout.distance(x, y))
    if d == 0:
        return x
    w = d / layout.R
    f = math.sin if layout.k > 0 else math.sinh
    return layout.normalize((f((1 - u) * w) * x + f(u * w) * y) / f(w))


def point_on_geodesic(layout: Layout, path: GeodesicPath, t: float) -> SurfacePoint:
    if not 0 <= t <= 1:
        raise ValueError(f"t={t!r} outside [0, 1]")
    if t == 0:
        return path.source
    if t == 1:
        return path.target
    goal = t * path.segment_sum
    acc = 0.0
    for seg in path.segments:
        if acc + seg.length >= goal and seg.length > 0:
            u = (goal - acc) / seg.length
            x = layout.position(seg.start)
            y = layout.position(seg.end)
            return layout.point(seg.face, interpolate_model(layout, x, y, min(max(u, 0.0), 1.0)))
        acc += seg.length
    return path.target
