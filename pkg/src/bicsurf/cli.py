"""Command line entry point: ``bicsurf <command> ...``.

Exit codes: 0 all checks pass, 1 comparison failure, 2 invalid input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .comparison import Condition, SamplerConfig, run_suite
from .cone import ConeSpec, cone_certify, cone_curvature_atom
from .conformal import DomainError, PlanarMeasure, PoleError, conformal_distance, cusp_divergence
from .generators import (
    InvalidInstanceError,
    convex_hull_surface,
    cylinder_torus,
    flat_torus,
    gen_convex_hull,
    octagon_genus2,
    sphere_icosa,
    waist_markers,
)
from .io import FormatError, InstanceFile, RunReport, consolidate, dumps, summary_table
from .oracles import ConeOracle, SurfaceOracle
from .points import SurfacePoint
from .surface import TriangulatedSurface, certify, cusp_scan, gauss_bonnet_residual, validate

log = logging.getLogger("bicsurf")

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3
PROFILE_ENV = "BICSURF_TOLERANCE_PROFILE"
PROFILES = {"default": 1.0, "strict": 1e-3, "loose": 1e2}
GEN_KINDS = ("convex_hull", "flat_torus", "cylinder_torus", "octagon_genus2", "cone", "sphere_icosa", "measure_single_atom")


class UsageError(ValueError):
    """Bad command-line input (exit code 2)."""


def _profile() -> tuple[str, float]:
    name = os.environ.get(PROFILE_ENV, "default").strip().lower() or "default"
    if name not in PROFILES:
        raise UsageError(f"{PROFILE_ENV} must be one of {sorted(PROFILES)}, got {name!r}")
    return name, PROFILES[name]


def _params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def _load(path) -> tuple[InstanceFile, object]:
    inst = InstanceFile.read(path)
    obj = inst.build()
    if isinstance(obj, TriangulatedSurface):
        diags = validate(obj)
        if diags:
            raise InvalidInstanceError("; ".join(str(d) for d in diags))
    return inst, obj


def _floats(text: str, n: int) -> list:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse {text!r} as numbers") from exc
    if len(vals) != n:
        raise UsageError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _point(obj, text: str):
    """Parse a point: 'face:b0,b1,b2' on surfaces, 'r,phi' on cones, 'x,y' in the plane."""
    if isinstance(obj, TriangulatedSurface):
        face, sep, rest = text.partition(":")
        if not sep:
            raise UsageError(f"surface points are written face:b0,b1,b2, got {text!r}")
        sp = SurfacePoint(int(face), tuple(_floats(rest, 3)))
        if not 0 <= sp.face < obj.n_faces:
            raise UsageError(f"face {sp.face} out of range")
        return sp
    if isinstance(obj, ConeSpec):
        r, phi = _floats(text, 2)
        return obj.point(r, phi)
    return tuple(_floats(text, 2))


def _oracle(obj, refinement: int):
    if isinstance(obj, TriangulatedSurface):
        return SurfaceOracle(obj, refinement=refinement)
    if isinstance(obj, ConeSpec):
        return ConeOracle(obj)
    raise UsageError("distance oracles exist for surfaces and cones only")


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _certification(obj, kappa: float) -> dict:
    if isinstance(obj, TriangulatedSurface):
        res = certify(obj, kappa)
        return {"kappa": kappa, "status": res.status.value, "witness": res.witness, "cusps": cusp_scan(obj)}
    if isinstance(obj, ConeSpec):
        atom = cone_curvature_atom(obj)
        return {"kappa": kappa, "status": cone_certify(obj, kappa).value, "apex_atom": atom, "cusps": [0] if atom >= 2 * math.pi else []}
    raise UsageError("certification needs a surface or cone instance")


# ----------------------------------------------------------------- commands
def cmd_gen(args) -> int:
    p = _params(args.param)
    kind = args.kind
    if kind == "convex_hull" and "points" in p:
        meta = {"generator": "convex_hull", "n": len(p["points"])}
        inst = InstanceFile.from_surface(convex_hull_surface(np.asarray(p["points"], dtype=float), meta))
    elif kind == "convex_hull":
        inst = InstanceFile.from_surface(gen_convex_hull(int(p.get("n", 20)), args.seed))
    elif kind == "flat_torus":
        inst = InstanceFile.from_surface(flat_torus(int(p.get("nu", 4)), int(p.get("nv", 4))))
    elif kind == "cylinder_torus":
        inst = InstanceFile.from_surface(cylinder_torus(float(p.get("a", 1.0)), float(p.get("b", 10.0)), int(p.get("nu", 3))))
    elif kind == "octagon_genus2":
        inst = InstanceFile.from_surface(octagon_genus2(float(p.get("side", 1.0))))
    elif kind == "sphere_icosa":
        inst = InstanceFile.from_surface(sphere_icosa(int(p.get("subdivisions", 0))))
    elif kind == "cone":
        kappa = args.kappa if args.kappa is not None else float(p.get("kappa", 0.0))
        inst = InstanceFile.from_cone(ConeSpec(kappa, float(p.get("theta", 2 * math.pi))))
    else:
        inst = InstanceFile.from_measure(PlanarMeasure.single_atom(float(p.get("mass", math.pi / 2))))
    if inst.kind == "surface":
        s = inst.build()
        if validate(s) or gauss_bonnet_residual(s) >= 1e-9:
            log.error("generated instance failed its own checks")
            return EXIT_NUMERIC
    _emit(inst.dumps(), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    inst, obj = _load(args.instance)
    info = {"type": inst.kind, "digest": inst.digest, "valid": True}
    if isinstance(obj, TriangulatedSurface):
        info.update(
            faces=obj.n_faces,
            vertices=len(obj.vertices),
            gauss_bonnet_residual=gauss_bonnet_residual(obj),
        )
    _emit(dumps(info), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    inst, obj = _load(args.instance)
    kappa = 0.0 if args.kappa is None else args.kappa
    report = RunReport(
        inst.digest,
        {"version": __version__, "kappa": kappa},
        certification=_certification(obj, kappa),
        gauss_bonnet_residual=gauss_bonnet_residual(obj) if isinstance(obj, TriangulatedSurface) else None,
        timestamp=_now(),
    )
    _emit(report.dumps(), args.out)
    return EXIT_OK


def cmd_dist(args) -> int:
    _, obj = _load(args.instance)
    oracle = _oracle(obj, args.refinement)
    p, q = _point(obj, args.source), _point(obj, args.target)
    d = oracle.distance(p, q)
    info = {"distance": d, "exact": oracle.exact}
    if not oracle.exact:
        info["refinement"] = args.refinement
    _emit(dumps(info), args.out)
    return EXIT_OK


def cmd_path(args) -> int:
    _, obj = _load(args.instance)
    if not isinstance(obj, TriangulatedSurface):
        raise UsageError("paths are reported for surface instances")
    oracle = _oracle(obj, args.refinement)
    path = oracle.path(_point(obj, args.source), _point(obj, args.target))
    _emit(dumps(path.to_json()), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    inst, obj = _load(args.instance)
    kappa = 0.0 if args.kappa is None else args.kappa
    cond = Condition.parse(args.condition, kappa)
    oracle = _oracle(obj, args.refinement)
    profile, scale = _profile()
    tolerance = args.tolerance if args.tolerance is not None else oracle.default_tolerance * scale
    config = SamplerConfig(samples=args.samples, seed=args.seed)
    if cond.local:
        radius = args.locality_radius
        if radius is None and isinstance(obj, TriangulatedSurface):
            radius = obj.metadata.get("locality_radius")
        if radius is None:
            raise UsageError("cat_local needs --locality-radius or a locality_radius in the instance metadata")
        config.locality_radius = float(radius)
    elif isinstance(obj, TriangulatedSurface) and "waist" in obj.metadata and cond.kind == "cat":
        w = waist_markers(obj)
        config.markers = [("waist", [w["p"], w["w0"], w["w1"], w["w2"]])]
    suite = run_suite(oracle, cond, config, tolerance)
    env = {
        "version": __version__,
        "seed": args.seed,
        "samples": args.samples,
        "tolerance": tolerance,
        "tolerance_profile": profile,
        "oracle": getattr(oracle, "mode", "cone"),
    }
    if not oracle.exact:
        env["refinement"] = args.refinement
    if cond.local:
        env["locality_radius"] = config.locality_radius
    report = RunReport(
        inst.digest,
        env,
        certification=_certification(obj, kappa),
        gauss_bonnet_residual=gauss_bonnet_residual(obj) if isinstance(obj, TriangulatedSurface) else None,
        suites=[suite.to_json()],
        timestamp=_now(),
    )
    _emit(report.dumps(), args.out)
    status = "PASS" if suite.passed else "FAIL"
    print(f"{status} {suite.condition} kappa={kappa:g}: {suite.failures} failures in {suite.evaluated} evaluated, worst margin {suite.worst_margin:.3e}", file=sys.stderr)
    return EXIT_OK if suite.passed else EXIT_FAIL


def cmd_conformal(args) -> int:
    _, obj = _load(args.instance)
    if not isinstance(obj, PlanarMeasure):
        raise UsageError("conformal needs a planar_measure instance")
    info = {}
    if args.cusp:
        eps = [float(x) for x in args.cusp.split(",")]
        rep = cusp_divergence(obj, eps)
        info["cusp"] = {"epsilons": rep.epsilons, "lengths": rep.lengths, "increments": rep.increments, "growth_rate": rep.growth_rate}
    if args.source and args.target:
        z1, z2 = _floats(args.source, 2), _floats(args.target, 2)
        info["distance"] = conformal_distance(obj, z1, z2, n=args.resolution)
        info["resolution"] = args.resolution
    if not info:
        raise UsageError("conformal needs --from/--to or --cusp")
    _emit(dumps(info), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    reports = [RunReport.read(p) for p in args.reports]
    merged = consolidate(reports)
    _emit(dumps(merged), args.out)
    print(summary_table(merged), file=sys.stderr)
    return EXIT_OK


# ------------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bicsurf", description="Curvature comparison tests on triangulated surfaces.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, kappa=False):
        p.add_argument("--out", help="write output here instead of stdout")
        if kappa:
            p.add_argument("--kappa", type=float)

    p = sub.add_parser("gen", help="generate an instance file")
    p.add_argument("kind", choices=GEN_KINDS)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--seed", type=int, default=0)
    common(p, kappa=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("instance")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("certify", help="measure inequalities at a curvature bound")
    p.add_argument("instance")
    common(p, kappa=True)
    p.set_defaults(func=cmd_certify)

    for name, func in (("dist", cmd_dist), ("path", cmd_path)):
        p = sub.add_parser(name, help=f"geodesic {'distance' if name == 'dist' else 'path'} between two points")
        p.add_argument("instance")
        p.add_argument("source", help="face:b0,b1,b2 (surface) or r,phi (cone)")
        p.add_argument("target")
        p.add_argument("--refinement", type=int, default=8)
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("check", help="run a comparison suite")
    p.add_argument("instance")
    p.add_argument("--condition", choices=("cbb", "cat_local", "cat_global"), default="cbb")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--refinement", type=int, default=8)
    p.add_argument("--locality-radius", type=float)
    common(p, kappa=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("conformal", help="distances and cusp lengths of a planar curvature measure")
    p.add_argument("instance")
    p.add_argument("--from", dest="source", help="x,y")
    p.add_argument("--to", dest="target", help="x,y")
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--cusp", help="comma-separated decreasing radii")
    common(p)
    p.set_defaults(func=cmd_conformal)

    p = sub.add_parser("report", help="consolidate run reports")
    p.add_argument("reports", nargs="+")
    common(p)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, FormatError, InvalidInstanceError, DomainError, PoleError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
