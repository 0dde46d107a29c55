"""Versioned JSON files for instances and run reports.

Floats are written with Python's shortest round-trip repr and keys are
sorted, so write -> read -> write is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .cone import ConeSpec
from .conformal import PlanarMeasure
from .surface import TriangulatedSurface

FORMAT_VERSION = 1
INSTANCE_TYPES = ("surface", "cone", "planar_measure")


class FormatError(ValueError):
    """Malformed or incompatible file."""


def plain(obj):
    """Convert numpy scalars/arrays and tuples to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass
class InstanceFile:
    kind: str
    payload: dict
    metadata: dict = field(default_factory=dict)
    version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.kind not in INSTANCE_TYPES:
            raise FormatError(f"unknown instance type {self.kind!r}")

    # --------------------------------------------------------------- build
    @classmethod
    def from_surface(cls, surface: TriangulatedSurface) -> "InstanceFile":
        payload = {
            "k": surface.k,
            "faces": surface.faces,
            "lengths": surface.lengths,
            "gluing": surface.gluing,
        }
        return cls("surface", plain(payload), plain(surface.metadata))

    @classmethod
    def from_cone(cls, cone: ConeSpec, metadata=None) -> "InstanceFile":
        return cls("cone", {"kappa": cone.kappa, "theta": cone.theta}, plain(metadata or {}))

    @classmethod
    def from_measure(cls, measure: PlanarMeasure, metadata=None) -> "InstanceFile":
        return cls("planar_measure", plain(measure.to_json()), plain(metadata or {}))

    def build(self):
        """The surface, cone or measure described by the file."""
        p = self.payload
        try:
            if self.kind == "surface":
                return TriangulatedSurface(
                    np.asarray(p["faces"], dtype=np.int64),
                    np.asarray(p["lengths"], dtype=float),
                    np.asarray(p["gluing"], dtype=np.int64),
                    float(p["k"]),
                    dict(self.metadata),
                )
            if self.kind == "cone":
                return ConeSpec(float(p["kappa"]), float(p["theta"]))
            return PlanarMeasure.from_json(p)
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed {self.kind} payload: {exc!r}") from exc

    # ------------------------------------------------------------ text i/o
    def to_json(self):
        return {"format_version": self.version, "type": self.kind, "payload": self.payload, "metadata": self.metadata}

    def dumps(self) -> str:
        return dumps(self.to_json())

    @classmethod
    def loads(cls, text: str) -> "InstanceFile":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"not valid JSON: {exc}") from exc
        if not isinstance(data, dict) or "type" not in data or "payload" not in data:
            raise FormatError("instance file needs 'type' and 'payload'")
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported format version {version!r} (expected {FORMAT_VERSION})")
        return cls(data["type"], data["payload"], data.get("metadata", {}), version)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def read(cls, path) -> "InstanceFile":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    @property
    def digest(self) -> str:
        body = dumps({"type": self.kind, "payload": self.payload, "metadata": self.metadata})
        return hashlib.sha256(body.encode()).hexdigest()


@dataclass
class RunReport:
    instance_digest: str
    environment: dict
    certification: dict | None = None
    gauss_bonnet_residual: float | None = None
    suites: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    timestamp: str | None = None
    version: int = FORMAT_VERSION

    def to_json(self):
        return {
            "format_version": self.version,
            "instance_digest": self.instance_digest,
            "environment": self.environment,
            "certification": self.certification,
            "gauss_bonnet_residual": self.gauss_bonnet_residual,
            "suites": self.suites,
            "extra": self.extra,
            "timestamp": self.timestamp,
        }

    def payload(self) -> str:
        """Serialized report without the timestamp; identical across reruns."""
        data = self.to_json()
        data.pop("timestamp")
        return dumps(data)

    def dumps(self) -> str:
        return dumps(self.to_json())

    @classmethod
    def from_json(cls, data) -> "RunReport":
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported report version {version!r} (expected {FORMAT_VERSION})")
        return cls(
            data["instance_digest"],
            data.get("environment", {}),
            data.get("certification"),
            data.get("gauss_bonnet_residual"),
            data.get("suites", []),
            data.get("extra", {}),
            data.get("timestamp"),
            version,
        )

    @classmethod
    def read(cls, path) -> "RunReport":
        with open(path, encoding="utf-8") as fh:
            try:
                return cls.from_json(json.load(fh))
            except (json.JSONDecodeError, KeyError, AttributeError) as exc:
                raise FormatError(f"{path}: not a run report ({exc})") from exc

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())


def consolidate(reports: list) -> dict:
    """Merge reports of one instance into per-seed sections."""
    if not reports:
        raise FormatError("nothing to consolidate")
    versions = {r.version for r in reports}
    if len(versions) > 1:
        raise FormatError(f"format versions differ: {sorted(versions)}")
    digests = sorted({r.instance_digest for r in reports})
    if len(digests) > 1:
        raise FormatError("reports describe different instances: " + ", ".join(digests))
    sections = []
    for r in reports:
        data = r.to_json()
        data.pop("format_version")
        data.pop("instance_digest")
        sections.append(data)
    sections.sort(key=lambda s: (str(s["environment"].get("seed")), dumps(s)))
    return {"format_version": FORMAT_VERSION, "instance_digest": digests[0], "runs": sections}


def summary_table(merged: dict) -> str:
    rows = [("seed", "suite", "kappa", "evaluated", "failures", "worst margin")]
    for run in merged["runs"]:
        seed = run["environment"].get("seed")
        for s in run["suites"]:
            worst = s.get("worst_margin")
            rows.append(
                (str(seed), s["condition"], f"{s['kappa']:g}", str(s["evaluated"]), str(s["failures"]), "-" if worst is None else f"{worst:.3e}")
            )
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
