"""JSON files for systems, graphs and attack plans.

Every file carries ``schema_version``; unknown fields are rejected so a typo
in an experiment config fails loudly instead of being ignored. Node and basis
indices in files are 1-based; everything in memory is 0-based.

Canonical form is ``json.dumps(obj, indent=2, sort_keys=True)`` plus a
trailing newline, with every matrix entry written as a float, so saving a
loaded canonical file reproduces it byte for byte.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .attacks import AttackPlan, LtiSystem, basis_indices
from .cones import ConeSpec
from .network import Digraph

SCHEMA_VERSION = 1
BUILTIN_PREFIX = "builtin:"

_NUMBER_ROW = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_MATRIX = {"type": "array", "items": _NUMBER_ROW, "minItems": 1}
_INDEX_LIST = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}
_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

CONE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["orthant", "lorentz", "psd", "polyhedral"]},
        "n": {"type": "integer", "minimum": 1},
        "facets": _MATRIX,
    },
}

SYSTEM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "A"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "description": {"type": "string"},
        "A": _MATRIX,
        "B": _MATRIX,
        "b_index": _INDEX_LIST,
        "C": _MATRIX,
        "c_index": _INDEX_LIST,
        "cone": CONE_SCHEMA,
        "graph": {"type": "string"},
    },
}

GRAPH_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "n", "edges"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "description": {"type": "string"},
        "n": {"type": "integer", "minimum": 1},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["to", "from", "w"],
                "properties": {
                    "to": {"type": "integer", "minimum": 1},
                    "from": {"type": "integer", "minimum": 1},
                    "w": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
    },
}

PLAN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "s0", "d0", "zeta", "x0"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "s0": _COMPLEX,
        "d0": {"type": "array", "items": _COMPLEX, "minItems": 1},
        "zeta": {"type": "array", "items": _COMPLEX, "minItems": 1},
        "x0": _NUMBER_ROW,
        "l1": {"type": "number"},
        "l2": {"type": "number"},
        "cone_feasible": {"type": "boolean"},
        "residual": {"type": "number", "minimum": 0},
        "tol": {"type": "number", "exclusiveMinimum": 0},
    },
}


class SchemaError(ValueError):
    """A file that violates its schema or whose dimensions do not agree."""


@dataclass(frozen=True)
class SystemFile:
    system: LtiSystem
    graph: Digraph | None = None
    description: str | None = None


def _validate(doc, schema, where):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        field = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: field {field}: {exc.message}") from None


def _rectangular(rows, name):
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise SchemaError(f"{name}: rows have different lengths {sorted(widths)}")
    return np.array(rows, dtype=float)


def _resolve(path) -> Path | resources.abc.Traversable:
    s = str(path)
    if s.startswith(BUILTIN_PREFIX):
        name = s[len(BUILTIN_PREFIX):]
        if not name.endswith(".json"):
            name += ".json"
        res = resources.files("conedefense") / "data" / name
        if not res.is_file():
            raise FileNotFoundError(f"no bundled file {name}")
        return res
    return Path(path)


def _read_json(path):
    res = _resolve(path)
    text = res.read_text()
    try:
        return json.loads(text), res
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None


def builtin_names() -> list[str]:
    data = resources.files("conedefense") / "data"
    return sorted(p.name[:-5] for p in data.iterdir() if p.name.endswith(".json"))


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write(doc, path) -> None:
    Path(path).write_text(dumps(doc))


# systems ----------------------------------------------------------------------------

def system_from_dict(doc, where: str = "system") -> LtiSystem:
    """Validate a system document and build the LtiSystem (no graph resolution)."""
    _validate(doc, SYSTEM_SCHEMA, where)
    A = _rectangular(doc["A"], f"{where}: A")
    n = A.shape[0]
    if A.shape != (n, n):
        raise SchemaError(f"{where}: A must be square, got {A.shape[0]}x{A.shape[1]}")
    eye = np.eye(n)

    def io_matrix(full, short, transpose):
        if full in doc and short in doc:
            raise SchemaError(f"{where}: both {full!r} and {short!r} given; ambiguous")
        if full not in doc and short not in doc:
            raise SchemaError(f"{where}: one of {full!r} or {short!r} is required")
        if short in doc:
            idx = doc[short]
            for k in idx:
                if k > n:
                    raise SchemaError(f"{where}: {short} entry {k} outside 1..{n}")
            idx = [k - 1 for k in idx]
            return eye[idx, :] if transpose else eye[:, idx]
        M = _rectangular(doc[full], f"{where}: {full}")
        if transpose and M.shape[1] != n:
            raise SchemaError(f"{where}: C has {M.shape[1]} columns, A is {n}x{n}")
        if not transpose and M.shape[0] != n:
            raise SchemaError(f"{where}: B has {M.shape[0]} rows, A is {n}x{n}")
        return M

    B = io_matrix("B", "b_index", transpose=False)
    C = io_matrix("C", "c_index", transpose=True)
    cone = None
    if "cone" in doc:
        try:
            cone = ConeSpec.from_dict(doc["cone"])
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"{where}: field cone: {exc}") from None
        if cone.ambient_dim != n:
            raise SchemaError(f"{where}: cone lives in R^{cone.ambient_dim}, A is {n}x{n}")
    return LtiSystem(A, B, C, cone)


def read_system(path) -> SystemFile:
    """Load a system file together with its referenced graph, if any.

    ``path`` may be ``builtin:<name>`` for a bundled fixture. A graph
    reference is resolved relative to the system file.
    """
    doc, res = _read_json(path)
    sys = system_from_dict(doc, str(path))
    graph = None
    if "graph" in doc:
        ref = doc["graph"]
        if str(path).startswith(BUILTIN_PREFIX) or ref.startswith(BUILTIN_PREFIX):
            target = ref if ref.startswith(BUILTIN_PREFIX) else BUILTIN_PREFIX + ref
        else:
            target = Path(path).parent / ref
        graph = load_graph(target)
    return SystemFile(sys, graph, doc.get("description"))


def load_system(path) -> LtiSystem:
    return read_system(path).system


def system_to_dict(sys: LtiSystem, description: str | None = None,
                   graph_ref: str | None = None, shorthand: bool = True) -> dict:
    """Canonical document; basis-vector B/C are written as 1-based index lists."""
    doc = {"schema_version": SCHEMA_VERSION, "A": sys.A.tolist()}
    ib = basis_indices(sys.B, 1) if shorthand else None
    ic = basis_indices(sys.C, 0) if shorthand else None
    if ib is not None:
        doc["b_index"] = [k + 1 for k in ib]
    else:
        doc["B"] = sys.B.tolist()
    if ic is not None:
        doc["c_index"] = [k + 1 for k in ic]
    else:
        doc["C"] = sys.C.tolist()
    if sys.cone is not None:
        doc["cone"] = sys.cone.to_dict()
    if description:
        doc["description"] = description
    if graph_ref:
        doc["graph"] = graph_ref
    return doc


def save_system(sys: LtiSystem, path, description: str | None = None,
                graph_ref: str | None = None) -> None:
    _write(system_to_dict(sys, description, graph_ref), path)


# graphs -----------------------------------------------------------------------------

def graph_from_dict(doc, where: str = "graph") -> Digraph:
    _validate(doc, GRAPH_SCHEMA, where)
    n = doc["n"]
    weights = {}
    for k, e in enumerate(doc["edges"]):
        i, j = e["to"], e["from"]
        if i > n or j > n:
            raise SchemaError(f"{where}: field edges/{k}: node outside 1..{n}")
        if i == j:
            raise SchemaError(f"{where}: field edges/{k}: self-loop at node {i}")
        if (i - 1, j - 1) in weights:
            raise SchemaError(f"{where}: field edges/{k}: duplicate edge {j} -> {i}")
        weights[(i - 1, j - 1)] = float(e["w"])
    return Digraph(n, weights)


def load_graph(path) -> Digraph:
    doc, _ = _read_json(path)
    return graph_from_dict(doc, str(path))


def graph_to_dict(g: Digraph, description: str | None = None) -> dict:
    edges = [{"to": i + 1, "from": j + 1, "w": float(w)}
             for (i, j), w in sorted(g.weights.items())]
    doc = {"schema_version": SCHEMA_VERSION, "n": g.n_nodes, "edges": edges}
    if description:
        doc["description"] = description
    return doc


def save_graph(g: Digraph, path, description: str | None = None) -> None:
    _write(graph_to_dict(g, description), path)


# attack plans -----------------------------------------------------------------------

def _cplx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def plan_to_dict(plan: AttackPlan, tol: float | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "s0": _cplx(plan.s0),
        "d0": [_cplx(v) for v in np.atleast_1d(plan.d0)],
        "zeta": [_cplx(v) for v in np.atleast_1d(plan.zeta)],
        "x0": [float(v) for v in plan.x0],
        "l1": float(plan.l1),
        "l2": float(plan.l2),
        "cone_feasible": bool(plan.cone_feasible),
        "residual": float(plan.residual),
    }
    if tol is not None:
        doc["tol"] = float(tol)
    return doc


def plan_from_dict(doc, where: str = "plan") -> AttackPlan:
    _validate(doc, PLAN_SCHEMA, where)
    s0 = complex(*doc["s0"])
    d0 = np.array([complex(*v) for v in doc["d0"]])
    zeta = np.array([complex(*v) for v in doc["zeta"]])
    x0 = np.array(doc["x0"], dtype=float)
    if zeta.size != x0.size:
        raise SchemaError(f"{where}: zeta has {zeta.size} entries, x0 has {x0.size}")
    if s0.imag == 0 and not np.any(d0.imag) and not np.any(zeta.imag):
        s0, d0, zeta = s0.real, d0.real, zeta.real
    return AttackPlan(s0, d0, zeta, x0, doc.get("l1", 1.0), doc.get("l2", 0.0),
                      doc.get("cone_feasible", False), doc.get("residual", 0.0))


def save_plan(plan: AttackPlan, path, tol: float | None = None) -> None:
    _write(plan_to_dict(plan, tol), path)


def load_plan(path) -> AttackPlan:
    doc, _ = _read_json(path)
    return plan_from_dict(doc, str(path))
