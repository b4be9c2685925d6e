"""JSON documents for presentations, metrics and reports.

Schema (version 1)::

    {
      "schema_version": 1,
      "name": "iwasawa",
      "dim_real": 6,
      "structure_constants": [[k, i, j, value], ...],   # 1-based, de^k += value e^i ^ e^j
      "complex_structure": {"type": "coframe", "coframe": [[[re, im], ...], ...]}
                         | {"type": "J", "J": [[...], ...]},
      "metric": {"hermitian_matrix": [[[re, im], ...], ...]},      # optional
      "trivializing_u": {"coefficient": [re, im]},                 # optional
      "family": {"parameter": "a", "range": [lo, hi], "value": a}  # optional
    }

``structure_constants`` may also be a dense nested list c[k][i][j].  A sparse
triple (k, i, j, v) with i > j stands for -v e^j ^ e^i; listing both orders
is allowed when they agree.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .algebra import LieAlgebraPresentation
from .errors import DimensionOdd, RaggedConstants, SchemaError

__all__ = [
    "SCHEMA_VERSION",
    "ModelDocument",
    "parse_document",
    "parse_model",
    "serialize_model",
    "entry_document",
    "canonical_json",
]

SCHEMA_VERSION = 1
ANTISYM_TOL = 1e-12


@dataclass
class ModelDocument:
    presentation: LieAlgebraPresentation
    metric: np.ndarray | None = None
    u: complex | None = None
    family: dict | None = None


def _require(doc, key, ptr, types):
    if key not in doc:
        raise SchemaError(f"missing required field {key!r}", ptr)
    val = doc[key]
    if not isinstance(val, types):
        raise SchemaError(f"field {key!r} has the wrong type", f"{ptr}/{key}")
    return val


def _number(x, ptr):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError("expected a number", ptr)
    if not math.isfinite(x):
        raise SchemaError("non-finite number", ptr)
    return float(x)


def _complex(x, ptr):
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(_number(x, ptr))
    if isinstance(x, list) and len(x) == 2:
        return complex(_number(x[0], f"{ptr}/0"), _number(x[1], f"{ptr}/1"))
    raise SchemaError("expected a number or [re, im]", ptr)


def _complex_matrix(rows, shape, ptr):
    if not isinstance(rows, list) or len(rows) != shape[0]:
        raise SchemaError(f"expected {shape[0]} rows", ptr)
    out = np.zeros(shape, dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != shape[1]:
            raise SchemaError(f"expected {shape[1]} entries", f"{ptr}/{i}")
        for j, x in enumerate(row):
            out[i, j] = _complex(x, f"{ptr}/{i}/{j}")
    return out


def _constants(raw, m, ptr):
    c = np.zeros((m, m, m))
    if not isinstance(raw, list):
        raise SchemaError("expected a list", ptr)
    dense = bool(raw) and all(isinstance(r, list) and r and isinstance(r[0], list) for r in raw)
    if dense:
        if len(raw) != m:
            raise RaggedConstants(f"expected {m} slices, got {len(raw)}", ptr)
        for k, mat in enumerate(raw):
            if len(mat) != m or any(not isinstance(r, list) or len(r) != m for r in mat):
                raise RaggedConstants(f"slice {k} is not {m} x {m}", f"{ptr}/{k}")
            for i, r in enumerate(mat):
                for j, x in enumerate(r):
                    c[k, i, j] = _number(x, f"{ptr}/{k}/{i}/{j}")
        bad = np.argwhere(np.abs(c + np.swapaxes(c, 1, 2)) > ANTISYM_TOL)
        if bad.size:
            k, i, j = bad[0]
            raise RaggedConstants(f"c[{k}][{i}][{j}] != -c[{k}][{j}][{i}]", f"{ptr}/{k}/{i}/{j}")
        return c
    seen = {}
    for t, triple in enumerate(raw):
        p = f"{ptr}/{t}"
        if not isinstance(triple, list) or len(triple) != 4:
            raise SchemaError("expected [k, i, j, value]", p)
        idx = []
        for s, x in enumerate(triple[:3]):
            if isinstance(x, bool) or not isinstance(x, int) or not 1 <= x <= m:
                raise SchemaError(f"index must be an integer in 1..{m}", f"{p}/{s}")
            idx.append(x - 1)
        k, i, j = idx
        v = _number(triple[3], f"{p}/3")
        if i == j:
            if v != 0:
                raise RaggedConstants("diagonal entry must vanish", p)
            continue
        if i > j:
            i, j, v = j, i, -v
        if (k, i, j) in seen:
            if abs(seen[(k, i, j)] - v) > ANTISYM_TOL:
                raise RaggedConstants(f"entries for e^{k + 1} at ({i + 1},{j + 1}) disagree", p)
            continue
        seen[(k, i, j)] = v
        c[k, i, j] = v
        c[k, j, i] = -v
    return c


def parse_document(document):
    """Validate a JSON document (text or already-decoded dict).

    Raises:
        SchemaError: with the JSON pointer of the offending field.
        DimensionOdd: odd real dimension.
        RaggedConstants: dense constants of the wrong shape, or constants that
            are not antisymmetric in the lower indices.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc.msg}") from None
    else:
        doc = document
    if not isinstance(doc, dict):
        raise SchemaError("document must be an object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r}", "/schema_version")
    m = _require(doc, "dim_real", "", int)
    if isinstance(m, bool) or m <= 0:
        raise SchemaError("dim_real must be a positive integer", "/dim_real")
    if m % 2:
        raise DimensionOdd("real dimension must be even", "/dim_real")
    n = m // 2
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise SchemaError("name must be a string", "/name")
    c = _constants(_require(doc, "structure_constants", "", list), m, "/structure_constants")

    cs = _require(doc, "complex_structure", "", dict)
    kind = cs.get("type")
    if kind == "coframe":
        P = _complex_matrix(cs.get("coframe"), (n, m), "/complex_structure/coframe")
        pres = LieAlgebraPresentation(m, c, coframe=P, name=name)
    elif kind == "J":
        J = _complex_matrix(cs.get("J"), (m, m), "/complex_structure/J")
        if np.abs(J.imag).max() > 0:
            raise SchemaError("J must be real", "/complex_structure/J")
        pres = LieAlgebraPresentation(m, c, J=J.real, name=name)
    else:
        raise SchemaError("type must be 'coframe' or 'J'", "/complex_structure/type")

    H = None
    if "metric" in doc:
        met = _require(doc, "metric", "", dict)
        H = _complex_matrix(met.get("hermitian_matrix"), (n, n), "/metric/hermitian_matrix")
    u = None
    if "trivializing_u" in doc:
        tu = _require(doc, "trivializing_u", "", dict)
        u = _complex(tu.get("coefficient", 1.0), "/trivializing_u/coefficient")
    family = None
    if "family" in doc:
        family = _require(doc, "family", "", dict)
        rng = family.get("range")
        if not (isinstance(rng, list) and len(rng) == 2):
            raise SchemaError("range must be [lo, hi]", "/family/range")
        for s, x in enumerate(rng):
            _number(x, f"/family/range/{s}")
        if not isinstance(family.get("parameter"), str):
            raise SchemaError("parameter must be a string", "/family/parameter")
    return ModelDocument(pres, H, u, family)


def parse_model(document):
    """LieAlgebraPresentation from a JSON document."""
    return parse_document(document).presentation


def _cpair(z):
    z = complex(z)
    return [z.real + 0.0, z.imag + 0.0]


def serialize_model(pres, metric=None, u=None, family=None):
    """Canonical dict for a presentation and optional extras."""
    c = pres.structure_constants
    m = pres.dim_real
    triples = [[k + 1, i + 1, j + 1, float(c[k, i, j])]
               for k in range(m) for i in range(m) for j in range(i + 1, m) if c[k, i, j] != 0]
    doc = {"schema_version": SCHEMA_VERSION, "name": pres.name, "dim_real": m,
           "structure_constants": triples}
    if pres.coframe is not None:
        doc["complex_structure"] = {"type": "coframe",
                                    "coframe": [[_cpair(z) for z in row] for row in pres.coframe]}
    else:
        doc["complex_structure"] = {"type": "J", "J": [[float(x) for x in row] for row in pres.J]}
    if metric is not None:
        doc["metric"] = {"hermitian_matrix": [[_cpair(z) for z in row] for row in np.asarray(metric)]}
    if u is not None:
        doc["trivializing_u"] = {"coefficient": _cpair(u)}
    if family is not None:
        doc["family"] = {k: (list(map(float, v)) if k == "range" else v) for k, v in family.items()}
    return doc


def entry_document(entry):
    return serialize_model(entry.presentation, entry.metric, entry.u, entry.family)


def _encode(x):
    if isinstance(x, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_encode(v)}" for k, v in sorted(x.items())) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in x) + "]"
    if isinstance(x, (bool, np.bool_)) or x is None:
        return json.dumps(bool(x) if x is not None else None)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return "%.17g" % (x + 0.0)
    if isinstance(x, (complex, np.complexfloating)):
        return _encode(_cpair(x))
    if isinstance(x, np.ndarray):
        return _encode(x.tolist())
    return json.dumps(str(x))


def canonical_json(obj):
    """Sorted keys, no whitespace, floats with 17 significant digits."""
    return _encode(obj)
