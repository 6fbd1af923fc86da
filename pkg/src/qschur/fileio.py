"""Problem and result files.

Both are JSON documents.  Real numbers are written with 17 significant
digits so that every double survives a round trip; complex entries are
``[re, im]`` pairs.  Non-finite report values are written as the strings
``"inf"``, ``"-inf"`` and ``"nan"``.  Writing is atomic: the text goes to a
temporary file in the target directory which then replaces the target.

Problem layout::

    {"format_version": 1, "field": "real",
     "vertices": [{"id": 1, "dim": 3}, ...],
     "edges": [{"id": 1, "src": 1, "dst": 2, "matrix": [[...], ...]}, ...]}
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile

import numpy as np

from .engine import Rejection, SchurDecomposition
from .errors import QSchurError
from .quiver import FIELDS, Edge, Quiver, Representation, Vertex, validate_dimensions
from .shapes import ShapeClass

FORMAT_VERSION = 1


class ParseError(QSchurError, ValueError):
    """Malformed problem or result file; ``path`` locates the offending field."""

    def __init__(self, message, path="", line=None):
        self.path = path
        self.line = line
        where = f" at line {line}" if line is not None else ""
        where += f" ({path})" if path else ""
        super().__init__(f"{message}{where}")


# -- emitting -------------------------------------------------------------


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if "e" not in s and "." not in s and s not in ("0", "-0"):
        s += ".0"
    if s == "-0":
        s = "0"
    return s


def _scalar(x) -> str:
    if isinstance(x, (complex, np.complexfloating)):
        return f"[{_num(x.real)}, {_num(x.imag)}]"
    return _num(x)


def _is_flat(v) -> bool:
    return isinstance(v, (list, tuple)) and all(
        not isinstance(x, (dict, list, tuple)) or (isinstance(x, (list, tuple)) and _is_flat(x) and len(x) <= 2)
        for x in v
    )


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON text; short lists of scalars stay on one line."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if _is_flat(obj):
            return "[" + ", ".join(dumps(x, indent + 1) for x in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(x, indent + 1) for x in obj) + "\n" + pad + "]"
    return _scalar(obj)


def _matrix_json(a: np.ndarray):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return [[[float(z.real), float(z.imag)] for z in row] for row in a]
    return [[float(x) for x in row] for row in a]


def write_atomic(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def problem_to_dict(quiver: Quiver, rep: Representation) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "field": rep.field,
        "vertices": [{"id": v.id, "dim": v.dim} for v in quiver.vertices],
        "edges": [
            {"id": e.id, "src": e.src, "dst": e.dst, "matrix": _matrix_json(rep[e.id])}
            for e in quiver.edges
        ],
    }


def emit_problem(quiver: Quiver, rep: Representation) -> str:
    return dumps(problem_to_dict(quiver, rep)) + "\n"


def checksum(quiver: Quiver, rep: Representation) -> str:
    """SHA-256 of the canonical problem text."""
    return hashlib.sha256(emit_problem(quiver, rep).encode("utf-8")).hexdigest()


# -- parsing --------------------------------------------------------------


def _loads(text):
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None


def _require(d, keys, path, optional=()):
    if not isinstance(d, dict):
        raise ParseError("expected an object", path)
    unknown = sorted(set(d) - set(keys) - set(optional))
    if unknown:
        raise ParseError(f"unknown field {unknown[0]!r}", path)
    missing = [k for k in keys if k not in d]
    if missing:
        raise ParseError(f"missing field {missing[0]!r}", path)


def _int(x, path, minimum=None):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError("expected an integer", path)
    if minimum is not None and x < minimum:
        raise ParseError(f"expected an integer >= {minimum}", path)
    return x


def _real(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        if x in ("inf", "-inf", "nan"):
            return float(x)
        raise ParseError("expected a number", path)
    return float(x)


def _parse_matrix(m, path, field):
    if not isinstance(m, list) or not m or not all(isinstance(r, list) for r in m):
        raise ParseError("matrix must be a non-empty list of rows", path)
    cols = len(m[0])
    out = []
    for i, row in enumerate(m):
        if len(row) != cols or cols == 0:
            raise ParseError("rows have different lengths", f"{path}[{i}]")
        vals = []
        for j, x in enumerate(row):
            p = f"{path}[{i}][{j}]"
            if isinstance(x, list):
                if field != "complex" or len(x) != 2:
                    raise ParseError("complex entry must be [re, im] in a complex problem", p)
                vals.append(complex(_real(x[0], p + "[0]"), _real(x[1], p + "[1]")))
            else:
                vals.append(_real(x, p))
        out.append(vals)
    a = np.array(out, dtype=np.float64 if field == "real" else np.complex128)
    if not np.all(np.isfinite(a)):
        raise ParseError("non-finite matrix entry", path)
    return a


def problem_from_dict(d) -> tuple[Quiver, Representation]:
    _require(d, ("format_version", "field", "vertices", "edges"), "")
    if d["format_version"] != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {d['format_version']!r}", "format_version")
    field = d["field"]
    if field not in FIELDS:
        raise ParseError(f"field must be one of {FIELDS}", "field")
    if not isinstance(d["vertices"], list) or not isinstance(d["edges"], list):
        raise ParseError("vertices and edges must be lists", "")
    verts = []
    for k, v in enumerate(d["vertices"]):
        p = f"vertices[{k}]"
        _require(v, ("id", "dim"), p)
        verts.append(Vertex(_int(v["id"], p + ".id", 1), _int(v["dim"], p + ".dim", 1)))
    if sorted(v.id for v in verts) != list(range(1, len(verts) + 1)):
        raise ParseError("vertex ids must be exactly 1..m", "vertices")
    ids = {v.id for v in verts}
    edges, mats = [], {}
    for k, e in enumerate(d["edges"]):
        p = f"edges[{k}]"
        _require(e, ("id", "src", "dst", "matrix"), p)
        eid = _int(e["id"], p + ".id", 1)
        src, dst = _int(e["src"], p + ".src"), _int(e["dst"], p + ".dst")
        for name, v in (("src", src), ("dst", dst)):
            if v not in ids:
                raise ParseError(f"unknown vertex {v}", f"{p}.{name}")
        edges.append(Edge(eid, src, dst))
        mats[eid] = _parse_matrix(e["matrix"], p + ".matrix", field)
    if sorted(e.id for e in edges) != list(range(1, len(edges) + 1)):
        raise ParseError("edge ids must be exactly 1..n", "edges")
    quiver = Quiver(tuple(verts), tuple(edges))
    rep = Representation(mats, field)
    problems = validate_dimensions(quiver, rep)
    if problems:
        index = {e.id: k for k, e in enumerate(edges)}
        first = int(problems[0].split(":")[0].split()[1])
        raise ParseError(problems[0], f"edges[{index[first]}].matrix")
    return quiver, rep


def parse_problem(text) -> tuple[Quiver, Representation]:
    """Parse problem-file text (``str`` or ``bytes``)."""
    return problem_from_dict(_loads(text))


def read_problem(path) -> tuple[Quiver, Representation]:
    with open(path, "rb") as fh:
        return parse_problem(fh.read())


# -- results --------------------------------------------------------------


def result_to_dict(outcome, quiver: Quiver, rep: Representation, verification=None,
                   version: str = "") -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "tool": {"name": "qschur", "version": version},
        "input_sha256": checksum(quiver, rep),
    }
    if isinstance(outcome, Rejection):
        doc["status"] = "rejected"
        doc["rejection"] = {
            "component": outcome.component,
            "code": outcome.code,
            "evidence": [list(c) for c in outcome.evidence],
            "offending": [{"component": i, "evidence": [list(c) for c in ev]} for i, ev in outcome.offending],
        }
    else:
        doc["status"] = "decomposed"
        doc["decomposition"] = {
            "field": outcome.field,
            "Q": [{"vertex": v, "matrix": _matrix_json(outcome.Q[v])} for v in sorted(outcome.Q)],
            "T": [
                {"edge": e, "shape": str(outcome.shapes[e]), "matrix": _matrix_json(outcome.T[e])}
                for e in sorted(outcome.T)
            ],
            "provenance": outcome.provenance,
        }
    doc["verification"] = verification.to_dict() if verification is not None else None
    return doc


def emit_result(outcome, quiver, rep, verification=None, version: str = "") -> str:
    return dumps(result_to_dict(outcome, quiver, rep, verification, version)) + "\n"


def result_from_dict(d):
    """Return ``(outcome, input_sha256, verification_dict)``."""
    _require(d, ("format_version", "tool", "input_sha256", "status", "verification"), "",
             optional=("decomposition", "rejection"))
    if d["status"] == "rejected":
        r = d.get("rejection")
        _require(r, ("component", "code", "evidence", "offending"), "rejection")
        offending = [(o["component"], tuple(tuple(c) for c in o["evidence"])) for o in r["offending"]]
        outcome = Rejection(r["component"], tuple(tuple(c) for c in r["evidence"]), r["code"], offending)
    elif d["status"] == "decomposed":
        dec = d.get("decomposition")
        _require(dec, ("field", "Q", "T", "provenance"), "decomposition")
        field = dec["field"]
        if field not in FIELDS:
            raise ParseError(f"field must be one of {FIELDS}", "decomposition.field")
        Q, T, shapes = {}, {}, {}
        for k, q in enumerate(dec["Q"]):
            p = f"decomposition.Q[{k}]"
            _require(q, ("vertex", "matrix"), p)
            Q[_int(q["vertex"], p + ".vertex")] = _parse_matrix(q["matrix"], p + ".matrix", field)
        for k, t in enumerate(dec["T"]):
            p = f"decomposition.T[{k}]"
            _require(t, ("edge", "shape", "matrix"), p)
            eid = _int(t["edge"], p + ".edge")
            T[eid] = _parse_matrix(t["matrix"], p + ".matrix", field)
            try:
                shapes[eid] = ShapeClass.parse(t["shape"])
            except ValueError as exc:
                raise ParseError(str(exc), p + ".shape") from None
        outcome = SchurDecomposition(Q, T, shapes, field, dec["provenance"])
    else:
        raise ParseError(f"unknown status {d['status']!r}", "status")
    return outcome, d["input_sha256"], d["verification"]


def parse_result(text):
    return result_from_dict(_loads(text))


def read_result(path):
    with open(path, "rb") as fh:
        return parse_result(fh.read())
