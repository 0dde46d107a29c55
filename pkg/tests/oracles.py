"""Independent reference computations, kept separate from the package.

Everything here uses mpmath or closed forms and never imports bicsurf.
Running this file prints the values frozen in the tests.
"""

import mpmath as mp

mp.mp.dps = 40


def hyperbolic_equilateral_angle(a):
    # cosh a = cosh^2 a - sinh^2 a cos(alpha), solved for alpha
    a = mp.mpf(a)
    return mp.acos((mp.cosh(a) ** 2 - mp.cosh(a)) / mp.sinh(a) ** 2)


def spherical_angle(a, b, c):
    """Angle opposite a on the unit sphere, spherical law of cosines."""
    a, b, c = (mp.mpf(x) for x in (a, b, c))
    return mp.acos((mp.cos(a) - mp.cos(b) * mp.cos(c)) / (mp.sin(b) * mp.sin(c)))


def hyperbolic_angle(a, b, c):
    a, b, c = (mp.mpf(x) for x in (a, b, c))
    return mp.acos((mp.cosh(b) * mp.cosh(c) - mp.cosh(a)) / (mp.sinh(b) * mp.sinh(c)))


def disc_log_integral(x, y):
    """Integral of ln|z - s| over the unit disc by 2-d quadrature in polar coordinates about 0."""
    z = mp.mpc(x, y)
    rz, tz = abs(z), mp.arg(z)

    def ring(r):
        # log singularity at t = arg z when r = |z|; split there
        return r * mp.quad(lambda t: mp.log(abs(z - r * mp.expj(t))), [tz, tz + mp.pi, tz + 2 * mp.pi])

    return mp.quad(ring, [0, rz, 1])


def waist_cat_margin():
    """CAT(0) (2+2)-point margin of four points on a circle of length 1 at 1/2, 0, 1/3, 2/3."""
    pos = {"p": mp.mpf(1) / 2, "q": 0, "x": mp.mpf(1) / 3, "y": mp.mpf(2) / 3}

    def d(u, v):
        t = abs(pos[u] - pos[v]) % 1
        return min(t, 1 - t)

    def ang(o, u, v):
        a, b, c = d(u, v), d(o, u), d(o, v)
        cosine = (b * b + c * c - a * a) / (2 * b * c)
        return mp.acos(max(-1, min(1, cosine)))

    at_p = ang("p", "q", "x") + ang("p", "q", "y") - ang("p", "x", "y")
    at_q = ang("q", "p", "x") + ang("q", "p", "y") - ang("q", "x", "y")
    return max(at_p, at_q)


def radial_length(omega, eps, r0=1):
    """Length of the segment [eps, r0] in the metric r^(-omega/2pi) |dz|."""
    s = 1 - mp.mpf(omega) / (2 * mp.pi)
    if s == 0:
        return mp.log(mp.mpf(r0) / eps)
    return (mp.mpf(r0) ** s - mp.mpf(eps) ** s) / s


def regular_octagon_area(side):
    return 2 * (1 + mp.sqrt(2)) * mp.mpf(side) ** 2


if __name__ == "__main__":
    print("hyperbolic equilateral angle a=1:", hyperbolic_equilateral_angle(1))
    print("spherical (1, 1.2, 0.9):", spherical_angle(1, 1.2, 0.9))
    print("hyperbolic (1, 1.2, 0.9):", hyperbolic_angle(1, 1.2, 0.9))
    print("disc log integral (0.3, 0.4):", disc_log_integral(0.3, 0.4))
    print("waist margin:", waist_cat_margin())
    print("radial 3pi eps=1e-4:", radial_length(3 * mp.pi, mp.mpf("1e-4")))
    print("octagon area:", regular_octagon_area(1))
