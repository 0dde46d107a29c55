"""Alexandrov comparison tests over distance oracles.

Curvature bounded below is tested with the distance-only (1+3)-point
condition: for every p, x, y, z the three model angles at p sum to at most
2*pi. Curvature bounded above uses the (2+2)-point condition: for p, q, x, y
one of

    angle(p; x, y) <= angle(p; q, x) + angle(p; q, y)
    angle(q; x, y) <= angle(q; p, x) + angle(q; p, y)

holds, where ``angle`` is the model angle in M^2(kappa). Margins are signed
so that a negative value is a violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model_trig import (
    ModelTriangleError,
    model_angle,
    model_angle_array,
    model_angles,
    model_diameter,
    model_side,
)

TWO_PI = 2 * math.pi
MIN_ANGLE = 1e-3


class UndefinedModelAngle(Exception):
    """The model triangle does not exist; the configuration is skipped, not failed."""


def _model_angle_from_sides(kappa, opposite, b, c):
    if b <= 0 or c <= 0:
        raise UndefinedModelAngle("zero-length side at the angle vertex")
    if kappa > 0 and opposite + b + c >= 2 * model_diameter(kappa):
        raise UndefinedModelAngle("perimeter not below twice the model diameter")
    try:
        return model_angle(kappa, (opposite, b, c))
    except ModelTriangleError as exc:
        raise UndefinedModelAngle(exc.condition) from exc


def model_angle_at(oracle, kappa: float, p, x, y) -> float:
    """Model angle at p of the comparison triangle for (p, x, y)."""
    d = oracle.distance
    return _model_angle_from_sides(kappa, d(x, y), d(p, x), d(p, y))


def cbb_quadruple_margin(oracle, kappa: float, p, x, y, z) -> float:
    return TWO_PI - (
        model_angle_at(oracle, kappa, p, x, y)
        + model_angle_at(oracle, kappa, p, y, z)
        + model_angle_at(oracle, kappa, p, z, x)
    )


def cat_fourpoint_margin(oracle, kappa: float, p, q, x, y) -> float:
    at_p = model_angle_at(oracle, kappa, p, q, x) + model_angle_at(oracle, kappa, p, q, y) - model_angle_at(oracle, kappa, p, x, y)
    at_q = model_angle_at(oracle, kappa, q, p, x) + model_angle_at(oracle, kappa, q, p, y) - model_angle_at(oracle, kappa, q, x, y)
    return max(at_p, at_q)


def point_side_margin(oracle, kappa: float, p, q, r, t: float, mode: str) -> float:
    """Compare d(p, m) for m at fraction t of [q r] with its model counterpart.

    Positive means the comparison holds: farther than the model point for
    ``"cbb"``, closer for ``"cat"``.
    """
    if mode not in ("cbb", "cat"):
        raise ValueError("mode must be 'cbb' or 'cat'")
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    d = oracle.distance
    dqp, dqr, dpr = d(q, p), d(q, r), d(p, r)
    m = oracle.interpolate(q, r, t)
    if dqp == 0:
        model = t * dqr
    else:
        angle_q = _model_angle_from_sides(kappa, dpr, dqp, dqr)
        model = model_side(kappa, dqp, t * dqr, angle_q)
    gap = d(p, m) - model
    return gap if mode == "cbb" else -gap


@dataclass(frozen=True)
class AngleEstimate:
    angle: float
    scales: tuple
    values: tuple

    @property
    def spread(self) -> float:
        """Change over the last halving; a convergence diagnostic."""
        return abs(self.values[-1] - self.values[-2]) if len(self.values) > 1 else 0.0


def default_scales(d_px: float, d_py: float, levels: int = 9) -> list:
    s0 = min(d_px, d_py) / 4
    return [s0 * 2.0**-i for i in range(levels)]


def upper_angle_estimate(oracle, p, x, y, scales=None) -> AngleEstimate:
    """Euclidean model angle at p of points at arclength s along [p x] and [p y], for shrinking s."""
    dpx, dpy = oracle.distance(p, x), oracle.distance(p, y)
    if dpx <= 0 or dpy <= 0:
        raise UndefinedModelAngle("hinge side of zero length")
    if scales is None:
        scales = default_scales(dpx, dpy)
    values = []
    for s in scales:
        if not 0 < s <= min(dpx, dpy):
            raise ValueError(f"scale {s!r} outside (0, {min(dpx, dpy)!r}]")
        q = oracle.interpolate(p, x, s / dpx)
        r = oracle.interpolate(p, y, s / dpy)
        values.append(_model_angle_from_sides(0.0, oracle.distance(q, r), s, s))
    return AngleEstimate(values[-1], tuple(scales), tuple(values))


def triangle_angles(oracle, p, q, r, scales=None) -> tuple:
    """Estimated angles of the geodesic triangle [p q r] at p, q and r."""
    return (
        upper_angle_estimate(oracle, p, q, r, scales).angle,
        upper_angle_estimate(oracle, q, r, p, scales).angle,
        upper_angle_estimate(oracle, r, p, q, scales).angle,
    )


def relative_excess_of(oracle, kappa: float, p, q, r, scales=None) -> float:
    d = oracle.distance
    sides = (d(q, r), d(p, r), d(p, q))
    try:
        model = model_angles(kappa, sides)
    except ModelTriangleError as exc:
        raise UndefinedModelAngle(exc.condition) from exc
    return math.fsum(triangle_angles(oracle, p, q, r, scales)) - math.fsum(model)


@dataclass(frozen=True)
class ExcessProfile:
    mu_hat: float  # sample max, a lower estimate of the supremum
    nu_hat: float  # sample min, an upper estimate of the infimum
    evaluated: int
    skipped: int


def excess_profile(oracle, kappa: float, p, q, r, n: int = 4) -> ExcessProfile:
    """Relative excesses of sub-triangles [p x y], x on [p q] and y on [p r] on an n x n grid."""
    xs = [oracle.interpolate(p, q, i / n) for i in range(1, n + 1)]
    ys = [oracle.interpolate(p, r, j / n) for j in range(1, n + 1)]
    vals, skipped = [], 0
    for x in xs:
        for y in ys:
            try:
                vals.append(relative_excess_of(oracle, kappa, p, x, y))
            except (UndefinedModelAngle, ValueError):
                skipped += 1
    if not vals:
        return ExcessProfile(math.nan, math.nan, 0, skipped)
    return ExcessProfile(max(vals), min(vals), len(vals), skipped)


# ------------------------------------------------------------------ suites
@dataclass(frozen=True)
class Condition:
    kind: str  # "cbb" or "cat"
    kappa: float
    local: bool = False

    def __post_init__(self):
        if self.kind not in ("cbb", "cat"):
            raise ValueError(f"unknown condition {self.kind!r}")
        if self.kind == "cbb" and self.local:
            raise ValueError("local sampling is only defined for the CAT condition")

    @property
    def label(self) -> str:
        scope = "local " if self.local else ""
        return f"{scope}{self.kind.upper()}({self.kappa:g})"

    @classmethod
    def parse(cls, name: str, kappa: float) -> "Condition":
        table = {"cbb": ("cbb", False), "cat_global": ("cat", False), "cat_local": ("cat", True)}
        if name not in table:
            raise ValueError(f"condition must be one of {sorted(table)}")
        kind, local = table[name]
        return cls(kind, kappa, local)


@dataclass
class SamplerConfig:
    samples: int = 10_000
    seed: int = 0
    pool_size: int = 30
    locality_radius: float | None = None
    ball_pool: int = 12
    quadruples_per_ball: int = 250
    min_angle: float = MIN_ANGLE
    include_special: bool = True
    markers: list = field(default_factory=list)  # (label, points) evaluated without the angle floor


@dataclass
class ComparisonReport:
    condition: str
    kappa: float
    tolerance: float
    attempted: int = 0
    evaluated: int = 0
    skipped: dict = field(default_factory=dict)
    failures: int = 0
    worst_margin: float = math.inf
    witnesses: list = field(default_factory=list)

    @property
    def n_skipped(self) -> int:
        return sum(self.skipped.values())

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json(self):
        return {
            "condition": self.condition,
            "kappa": self.kappa,
            "tolerance": self.tolerance,
            "attempted": self.attempted,
            "evaluated": self.evaluated,
            "skipped": dict(sorted(self.skipped.items())),
            "failures": self.failures,
            "worst_margin": self.worst_margin if math.isfinite(self.worst_margin) else None,
            "witnesses": self.witnesses,
        }


def _min_triangle_angle(kappa, D, i, j, k):
    a, b, c = D[j, k], D[i, k], D[i, j]
    return np.fmin(
        np.fmin(model_angle_array(kappa, a, b, c), model_angle_array(kappa, b, c, a)),
        model_angle_array(kappa, c, a, b),
    )


def _ang(kappa, D, p, x, y):
    return model_angle_array(kappa, D[x, y], D[p, x], D[p, y])


def _margins(cond: Condition, D: np.ndarray, idx: np.ndarray, min_angle: float):
    """Margins and skip reasons for index quadruples against a distance matrix."""
    k = cond.kappa
    a, b, c, d = idx.T
    if cond.kind == "cbb":
        m = TWO_PI - (_ang(k, D, a, b, c) + _ang(k, D, a, c, d) + _ang(k, D, a, d, b))
        tris = [(a, b, c), (a, c, d), (a, d, b)]
    else:
        at_p = _ang(k, D, a, b, c) + _ang(k, D, a, b, d) - _ang(k, D, a, c, d)
        at_q = _ang(k, D, b, a, c) + _ang(k, D, b, a, d) - _ang(k, D, b, c, d)
        m = np.fmax(at_p, at_q)
        m = np.where(np.isnan(at_p) | np.isnan(at_q), np.nan, m)
        tris = [(a, b, c), (a, b, d), (a, c, d), (b, c, d)]
    undefined = np.isnan(m)
    floor = np.full(len(m), np.inf)
    for t in tris:
        floor = np.fmin(floor, _min_triangle_angle(k, D, *t))
    degenerate = ~undefined & ~(floor >= min_angle)
    return m, undefined, degenerate


def _draw_quadruples(rng, n: int, count: int) -> np.ndarray:
    if n < 4:
        raise ValueError("need at least four points")
    out = np.empty((0, 4), dtype=np.int64)
    while len(out) < count:
        cand = rng.integers(0, n, size=(2 * (count - len(out)) + 8, 4))
        s = np.sort(cand, axis=1)
        ok = np.all(s[:, 1:] != s[:, :-1], axis=1)
        out = np.concatenate([out, cand[ok]])
    return out[:count]


def _special_points(oracle) -> list:
    f = getattr(oracle, "special_points", None)
    return list(f()) if f is not None else []


def _marker_margin(oracle, cond: Condition, pts):
    if cond.kind == "cbb":
        return cbb_quadruple_margin(oracle, cond.kappa, *pts)
    return cat_fourpoint_margin(oracle, cond.kappa, *pts)


def run_suite(oracle, condition: Condition, config: SamplerConfig, tolerance: float | None = None) -> ComparisonReport:
    """Sample quadruples, evaluate the comparison condition and collect the worst witnesses."""
    if tolerance is None:
        tolerance = oracle.default_tolerance
    rng = np.random.default_rng(config.seed)
    report = ComparisonReport(condition.label, condition.kappa, tolerance)
    candidates = []  # (margin, label, points)

    def record(margins, undefined, degenerate, pts_of):
        report.attempted += len(margins)
        nu, nd = int(undefined.sum()), int(degenerate.sum())
        if nu:
            report.skipped["undefined_model_angle"] = report.skipped.get("undefined_model_angle", 0) + nu
        if nd:
            report.skipped["min_angle_floor"] = report.skipped.get("min_angle_floor", 0) + nd
        ok = ~undefined & ~degenerate
        report.evaluated += int(ok.sum())
        vals = np.where(ok, margins, np.inf)
        report.failures += int((vals < -tolerance).sum())
        if ok.any():
            report.worst_margin = min(report.worst_margin, float(vals.min()))
            for i in np.argsort(vals, kind="stable")[:10]:
                if np.isfinite(vals[i]):
                    candidates.append((float(vals[i]), "sampled", pts_of(i)))

    if condition.local:
        radius = config.locality_radius
        if radius is None or radius <= 0:
            raise ValueError("local CAT testing needs a positive locality radius")
        n_balls = max(1, math.ceil(config.samples / config.quadruples_per_ball))
        specials = _special_points(oracle) if config.include_special else []
        remaining = config.samples
        for b in range(n_balls):
            # alternate between surface vertices (where curvature concentrates) and random centres
            if b % 2 == 0 and b // 2 < len(specials):
                centre = specials[b // 2]
            else:
                centre = oracle.sample(rng)
            pool = oracle.sample_ball(rng, centre, radius, config.ball_pool)
            D = oracle.pairwise(pool)
            count = min(config.quadruples_per_ball, remaining)
            remaining -= count
            idx = _draw_quadruples(rng, len(pool), count)
            m, und, deg = _margins(condition, D, idx, config.min_angle)
            record(m, und, deg, lambda i, pool=pool, idx=idx: [pool[j] for j in idx[i]])
    else:
        pool = [oracle.sample(rng) for _ in range(config.pool_size)]
        if config.include_special:
            pool += _special_points(oracle)[: max(1, config.pool_size // 4)]
        D = oracle.pairwise(pool)
        idx = _draw_quadruples(rng, len(pool), config.samples)
        m, und, deg = _margins(condition, D, idx, config.min_angle)
        record(m, und, deg, lambda i: [pool[j] for j in idx[i]])

    for label, pts in config.markers:
        report.attempted += 1
        try:
            margin = _marker_margin(oracle, condition, pts)
        except UndefinedModelAngle:
            report.skipped["undefined_model_angle"] = report.skipped.get("undefined_model_angle", 0) + 1
            continue
        report.evaluated += 1
        if margin < -tolerance:
            report.failures += 1
        report.worst_margin = min(report.worst_margin, margin)
        candidates.append((margin, label, list(pts)))

    candidates.sort(key=lambda c: c[0])
    # marker quadruples are always reported, sampled ones only if among the worst
    kept = candidates[:10] + [c for c in candidates[10:] if c[1] != "sampled"]
    to_json = oracle.point_to_json
    for margin, label, pts in kept:
        report.witnesses.append(
            {
                "margin": margin,
                "source": label,
                "points": [to_json(p) for p in pts],
                "distances": [[oracle.distance(a, b) for b in pts] for a in pts],
            }
        )
    return report


def reevaluate_witness(oracle, condition: Condition, points) -> float:
    return _marker_margin(oracle, condition, points)
