"""Trigonometry of the constant-curvature model planes M^2(kappa).

All functions take the curvature ``kappa`` first and work for any sign.
Curved formulas are evaluated on the unit model space after rescaling the
sides by ``sqrt(|kappa|)``; when ``|kappa| * max_side**2`` is below
``FLAT_THRESHOLD`` the Euclidean formulas are used instead.

Angles come from half-angle formulas (``tan(alpha/2)`` as a ratio of
products) rather than from ``acos`` of the law of cosines, which keeps them
accurate for thin and nearly degenerate triangles.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

FLAT_THRESHOLD = 1e-12
CLAMP_TOL = 1e-9


class ModelTriangleError(ValueError):
    """Side lengths do not form a triangle in the requested model plane."""

    def __init__(self, condition: str):
        super().__init__(condition)
        self.condition = condition


class TriangleSides(NamedTuple):
    a: float
    b: float
    c: float


class ModelAngles(NamedTuple):
    """Angles opposite sides a, b and c respectively."""

    alpha: float
    beta: float
    gamma: float


def model_diameter(kappa: float) -> float:
    """Diameter of M^2(kappa); ``math.inf`` when kappa <= 0."""
    if kappa > 0:
        return math.pi / math.sqrt(kappa)
    return math.inf


def _is_flat(kappa: float, scale: float) -> bool:
    return kappa == 0 or abs(kappa) * scale * scale < FLAT_THRESHOLD


def triangle_exists(kappa: float, sides) -> bool:
    a, b, c = sides
    if min(a, b, c) < 0:
        return False
    if a > b + c or b > a + c or c > a + b:
        return False
    if kappa > 0 and a + b + c >= 2 * model_diameter(kappa):
        return False
    return True


def _half_perimeter_terms(kappa, a, b, c):
    """Return (s, s-a, s-b, s-c), clamping roundoff-size violations.

    Raises ModelTriangleError when a violation exceeds the clamp tolerance.
    """
    if min(a, b, c) < 0:
        raise ModelTriangleError(f"negative side length in {(a, b, c)}")
    perimeter = a + b + c
    tol = CLAMP_TOL * max(perimeter, 1e-300)
    terms = []
    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
        t = 0.5 * (y + z - x)
        if t < 0:
            if t < -tol:
                raise ModelTriangleError(
                    f"triangle inequality violated: {x!r} > {y!r} + {z!r}"
                )
            t = 0.0
        terms.append(t)
    s = 0.5 * perimeter
    if kappa > 0 and not _is_flat(kappa, max(a, b, c)):
        limit = model_diameter(kappa)
        if s >= limit * (1 + CLAMP_TOL):
            raise ModelTriangleError(
                f"perimeter {perimeter!r} not below 2*diameter {2 * limit!r} for kappa={kappa!r}"
            )
        s = min(s, limit)
    return s, terms[0], terms[1], terms[2]


def model_angle(kappa: float, sides) -> float:
    """Angle opposite side ``a`` of the model triangle with sides (a, b, c)."""
    a, b, c = sides
    if b <= 0 or c <= 0:
        raise ModelTriangleError("angle undefined: an adjacent side has zero length")
    s, sa, sb, sc = _half_perimeter_terms(kappa, a, b, c)
    if _is_flat(kappa, max(a, b, c)):
        num = sb * sc
        den = s * sa
    else:
        k = math.sqrt(abs(kappa))
        f = math.sin if kappa > 0 else math.sinh
        num = f(sb * k) * f(sc * k)
        den = f(s * k) * f(sa * k)
    return 2.0 * math.atan2(math.sqrt(max(num, 0.0)), math.sqrt(max(den, 0.0)))


def model_angles(kappa: float, sides) -> ModelAngles:
    a, b, c = sides
    return ModelAngles(
        model_angle(kappa, (a, b, c)),
        model_angle(kappa, (b, c, a)),
        model_angle(kappa, (c, a, b)),
    )


def model_side(kappa: float, b: float, c: float, alpha: float) -> float:
    """Side opposite the angle ``alpha`` enclosed by sides b and c."""
    if b < 0 or c < 0:
        raise ModelTriangleError("negative side length")
    if not (-CLAMP_TOL <= alpha <= math.pi + CLAMP_TOL):
        raise ModelTriangleError(f"angle {alpha!r} outside [0, pi]")
    alpha = min(max(alpha, 0.0), math.pi)
    h = math.sin(0.5 * alpha) ** 2
    if _is_flat(kappa, max(b, c)):
        return math.sqrt((b - c) ** 2 + 4.0 * b * c * h)
    k = math.sqrt(abs(kappa))
    bk, ck = b * k, c * k
    if kappa > 0:
        if bk > math.pi * (1 + CLAMP_TOL) or ck > math.pi * (1 + CLAMP_TOL):
            raise ModelTriangleError("side exceeds the diameter of the model sphere")
        hav = math.sin(0.5 * (bk - ck)) ** 2 + math.sin(bk) * math.sin(ck) * h
        if hav > 1 + CLAMP_TOL:
            raise ModelTriangleError(f"haversine {hav!r} exceeds 1")
        hav = min(max(hav, 0.0), 1.0)
        return 2.0 * math.asin(math.sqrt(hav)) / k
    hav = math.sinh(0.5 * (bk - ck)) ** 2 + math.sinh(bk) * math.sinh(ck) * h
    return 2.0 * math.asinh(math.sqrt(max(hav, 0.0))) / k


def model_area(kappa: float, sides) -> float:
    """Area of the model triangle: Heron for kappa=0, L'Huilier otherwise."""
    a, b, c = sides
    s, sa, sb, sc = _half_perimeter_terms(kappa, a, b, c)
    if _is_flat(kappa, max(a, b, c)):
        return math.sqrt(max(s * sa * sb * sc, 0.0))
    k = math.sqrt(abs(kappa))
    f = math.tan if kappa > 0 else math.tanh
    prod = f(0.5 * s * k) * f(0.5 * sa * k) * f(0.5 * sb * k) * f(0.5 * sc * k)
    # spherical excess (kappa > 0) or hyperbolic defect (kappa < 0)
    e = 4.0 * math.atan(math.sqrt(max(prod, 0.0)))
    return e / abs(kappa)


def relative_excess(kappa: float, measured, sides) -> float:
    """Angle sum of a triangle minus the angle sum of its kappa-model triangle."""
    model = model_angles(kappa, sides)
    return sum(measured) - sum(model)


def model_angle_array(kappa: float, a, b, c):
    """Vectorized :func:`model_angle`; NaN where the model triangle is undefined."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    perimeter = a + b + c
    tol = CLAMP_TOL * np.maximum(perimeter, 1e-300)
    sa, sb, sc = 0.5 * (b + c - a), 0.5 * (a + c - b), 0.5 * (a + b - c)
    bad = (np.minimum(np.minimum(sa, sb), sc) < -tol) | (b <= 0) | (c <= 0) | (a < 0)
    sa, sb, sc = np.maximum(sa, 0), np.maximum(sb, 0), np.maximum(sc, 0)
    s = 0.5 * perimeter
    if _is_flat(kappa, float(np.max(np.maximum(np.maximum(a, b), c), initial=0.0))):
        num, den = sb * sc, s * sa
    else:
        k = math.sqrt(abs(kappa))
        if kappa > 0:
            limit = math.pi / k
            bad |= s >= limit * (1 + CLAMP_TOL)
            s = np.minimum(s, limit)
            f = np.sin
        else:
            f = np.sinh
        num, den = f(sb * k) * f(sc * k), f(s * k) * f(sa * k)
    out = 2.0 * np.arctan2(np.sqrt(np.maximum(num, 0.0)), np.sqrt(np.maximum(den, 0.0)))
    return np.where(bad, np.nan, out)
