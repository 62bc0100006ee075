"""Problem specifications: JSON ingestion, presets, and deterministic JSON output."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping

import numpy as np

from .errors import DegenerateMetric, SpecError
from .lie3 import AlgebraType, LieAlgebra3, standard_algebra

log = logging.getLogger(__name__)

SYM_TOL = 1e-12

DEFAULT_OPTIONS = {
    "t_max": 50.0,
    "n_random_starts": 4,
    "probe_points": [],
    "rtol": 1e-10,
    "atol": 1e-12,
    "norm_cap": 1e8,
    "h_min": 1e-14,
}

_ALGEBRAS = {
    "abelian": (AlgebraType.ABELIAN, None),
    "heisenberg": (AlgebraType.HEISENBERG, None),
    "su2": (AlgebraType.SU2, None),
    "e2": (AlgebraType.E2, None),
    "e11": (AlgebraType.E11, None),
    "sl2-orthonormal": (AlgebraType.SL2R, {"frame": "orthonormal"}),
    "sl2-hyperbolic": (AlgebraType.SL2R, {"frame": "hyperbolic"}),
}

_R2 = 2**-0.5

PRESETS: Dict[str, dict] = {
    "example1": {
        "name": "example1",
        "algebra": {"preset": "e2"},
        "metric": {"frame": "algebra", "matrix": [[-1, 0, 1], [0, 1, 0], [1, 0, 0]]},
    },
    "example2": {
        "name": "example2",
        "algebra": {"preset": "sl2-hyperbolic"},
        "metric": {"frame": "algebra", "matrix": [[1, 0, 0], [0, 0, 0.5], [0, 0.5, 1]]},
    },
    "example3": {
        "name": "example3",
        "algebra": {"preset": "sl2-orthonormal"},
        "metric": {"frame": "algebra", "matrix": [[0.5, 0, 0], [0, 1 / 3, 0], [0, 0, -1]]},
    },
    "example4": {
        "name": "example4",
        "algebra": {"preset": "sl2-orthonormal"},
        "metric": {"frame": "algebra", "matrix": [[1, 0, 0], [0, -1, 0], [0, 0, 2]]},
    },
    "example5": {
        "name": "example5",
        "algebra": {"type": "NonUnimodular", "params": {"alpha": 0.5, "beta": 0, "gamma": 0, "delta": 1.5}},
        "metric": {"frame": "dual-energy", "matrix": [[2, 0, 0], [0, 0, -0.5], [0, -0.5, 0]]},
        "options": {"probe_points": [[_R2, 1, 1]]},
    },
    "e2-standard": {"name": "e2-standard", "algebra": {"preset": "e2"},
                    "metric": {"frame": "algebra", "matrix": np.eye(3).tolist()}},
    "e11-standard": {"name": "e11-standard", "algebra": {"preset": "e11"},
                     "metric": {"frame": "algebra", "matrix": np.eye(3).tolist()}},
    "heisenberg": {"name": "heisenberg", "algebra": {"preset": "heisenberg"},
                   "metric": {"frame": "algebra", "matrix": np.eye(3).tolist()}},
    "abelian": {"name": "abelian", "algebra": {"preset": "abelian"},
                "metric": {"frame": "algebra", "matrix": np.eye(3).tolist()}},
    "su2": {"name": "su2", "algebra": {"preset": "su2"},
            "metric": {"frame": "algebra", "matrix": np.eye(3).tolist()}},
    "sl2-orthonormal": {"name": "sl2-orthonormal", "algebra": {"preset": "sl2-orthonormal"},
                        "metric": {"frame": "algebra", "matrix": [[1, 0, 0], [0, 1, 0], [0, 0, -1]]}},
    "sl2-hyperbolic": {"name": "sl2-hyperbolic", "algebra": {"preset": "sl2-hyperbolic"},
                       "metric": {"frame": "algebra", "matrix": [[1, 0, 0], [0, 0, 1], [0, 1, 0]]}},
}

PAPER_EXAMPLES = ("example1", "example2", "example3", "example4", "example5")


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    name: str
    algebra: LieAlgebra3
    metric: np.ndarray  # algebra frame
    options: Dict[str, Any] = field(default_factory=dict)
    document: Dict[str, Any] = field(default_factory=dict)

    def option(self, key):
        return self.options.get(key, DEFAULT_OPTIONS.get(key))


def _matrix(value, what) -> np.ndarray:
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise SpecError(f"{what} must be a 3x3 array of numbers") from None
    if M.shape != (3, 3) or not np.all(np.isfinite(M)):
        raise SpecError(f"{what} must be a finite 3x3 array, got shape {M.shape}")
    return M


def _algebra(doc) -> LieAlgebra3:
    if isinstance(doc, str):
        doc = {"preset": doc}
    if not isinstance(doc, Mapping):
        raise SpecError("algebra must be an object or a preset name")
    if "preset" in doc:
        name = str(doc["preset"]).lower()
        if name in _ALGEBRAS:
            t, params = _ALGEBRAS[name]
            return standard_algebra(t, params)
        if name in PRESETS:
            return _algebra(PRESETS[name]["algebra"])
        raise SpecError(f"unknown algebra preset {doc['preset']!r}")
    if "type" in doc:
        names = {t.value.lower(): t for t in AlgebraType}
        t = names.get(str(doc["type"]).lower())
        if t is None:
            raise SpecError(f"unknown algebra type {doc['type']!r}")
        return standard_algebra(t, doc.get("params"))
    if "brackets" in doc:
        entries = []
        for e in doc["brackets"]:
            try:
                i, j, r = int(e["i"]), int(e["j"]), [float(v) for v in e["result"]]
            except (KeyError, TypeError, ValueError):
                raise SpecError(f"bracket entry {e!r} needs integer i, j and a 3-vector result") from None
            if not (1 <= i <= 3 and 1 <= j <= 3) or len(r) != 3:
                raise SpecError(f"bracket entry {e!r} out of range")
            entries.append((i, j, r))
        return LieAlgebra3.from_brackets(entries)
    raise SpecError("algebra needs one of 'preset', 'type' or 'brackets'")


def spec_from_dict(doc: Mapping, default_name: str = "spec") -> ProblemSpec:
    if not isinstance(doc, Mapping):
        raise SpecError("spec must be a JSON object")
    if "algebra" not in doc or "metric" not in doc:
        raise SpecError("spec needs 'algebra' and 'metric'")
    alg = _algebra(doc["algebra"])
    m = doc["metric"]
    if isinstance(m, list):
        m = {"frame": "algebra", "matrix": m}
    if not isinstance(m, Mapping) or "matrix" not in m:
        raise SpecError("metric must be an object with a 'matrix'")
    M = _matrix(m["matrix"], "metric.matrix")
    asym = float(np.max(np.abs(M - M.T)))
    if asym > SYM_TOL * max(1.0, float(np.max(np.abs(M)))):
        log.warning("metric matrix asymmetric by %.3e; symmetrizing", asym)
    M = 0.5 * (M + M.T)
    frame = m.get("frame", "algebra")
    if frame == "dual-energy":
        if abs(np.linalg.det(M)) <= 1e-14 * max(1.0, float(np.max(np.abs(M)))) ** 3:
            raise DegenerateMetric("dual energy form is degenerate")
        M = np.linalg.inv(M)
        M = 0.5 * (M + M.T)
    elif frame != "algebra":
        raise SpecError(f"metric.frame must be 'algebra' or 'dual-energy', got {frame!r}")
    opts = dict(doc.get("options") or {})
    unknown = set(opts) - set(DEFAULT_OPTIONS) - {"seed"}
    if unknown:
        raise SpecError(f"unknown options {sorted(unknown)}")
    return ProblemSpec(str(doc.get("name", default_name)), alg, M, opts, dict(doc))


def load_spec(path_or_name: str) -> ProblemSpec:
    """Read a JSON spec file, or build one of the named presets."""
    if path_or_name in PRESETS and not os.path.exists(path_or_name):
        return spec_from_dict(PRESETS[path_or_name])
    try:
        with open(path_or_name) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise SpecError(f"no such spec file or preset: {path_or_name!r}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SpecError(f"{path_or_name}: invalid JSON ({exc})") from None
    return spec_from_dict(doc, default_name=os.path.splitext(os.path.basename(path_or_name))[0])


# ----------------------------------------------------------------------------
# deterministic JSON


def _fmt_float(v: float) -> str:
    if math.isnan(v):
        return '"NaN"'
    if math.isinf(v):
        return '"Infinity"' if v > 0 else '"-Infinity"'
    s = "%.17g" % v
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON with floats printed at 17 significant digits; key order as given."""
    obj = to_jsonable(obj)

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _fmt_float(o)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            items = [pad + enc(v, level + 1) for v in o]
            return "[\n" + ",\n".join(items) + "\n" + end + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"
