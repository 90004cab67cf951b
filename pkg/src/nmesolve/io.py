"""JSON problem and result files.

Real matrices are nested arrays of numbers (row-major); complex matrices are
nested arrays of ``[re, im]`` pairs. Floats are written with Python's
shortest round-trip ``repr``, so parse(write(p)) reproduces every entry
bit for bit.
"""

import json
import math

import numpy as np

from .errors import NMEError, ProblemFileError
from .operators import MatrixOperatorSpec
from .transform import FIELDS, SIGNS, ProblemSpec


def encode_matrix(M, field_name):
    M = np.asarray(M, dtype=np.complex128)
    if field_name == "real":
        return [[float(x.real) for x in row] for row in M]
    return [[[float(x.real), float(x.imag)] for x in row] for row in M]


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ProblemFileError(f"expected a number, got {json.dumps(x)}", where)
    if not math.isfinite(x):
        raise ProblemFileError("non-finite number", where)
    return float(x)


def decode_matrix(obj, field_name, where):
    if not isinstance(obj, list) or not obj:
        raise ProblemFileError("expected a non-empty array of rows", where)
    n = len(obj)
    M = np.empty((n, n), dtype=np.complex128)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != n:
            raise ProblemFileError(f"expected a row of length {n}", f"{where}[{i}]")
        for j, x in enumerate(row):
            loc = f"{where}[{i}][{j}]"
            if field_name == "real":
                M[i, j] = _number(x, loc)
            else:
                if not isinstance(x, list) or len(x) != 2:
                    raise ProblemFileError("expected an [re, im] pair", loc)
                M[i, j] = complex(_number(x[0], loc + "[0]"), _number(x[1], loc + "[1]"))
    return M


def problem_to_dict(p):
    op = {"kind": p.f.kind}
    if p.f.U is not None:
        op["U"] = encode_matrix(p.f.U, p.field)
    return {
        "field": p.field,
        "sign": p.sign,
        "operator": op,
        "A": encode_matrix(p.A, p.field),
        "Q": encode_matrix(p.Q, p.field),
    }


def _choice(doc, key, options):
    if key not in doc:
        raise ProblemFileError(f"missing field {key!r}", "$")
    val = doc[key]
    if val not in options:
        raise ProblemFileError(f"must be one of {list(options)}, got {json.dumps(val)}", f"$.{key}")
    return val


def problem_from_dict(doc):
    if not isinstance(doc, dict):
        raise ProblemFileError("top level must be an object", "$")
    fld = _choice(doc, "field", FIELDS)
    sign = _choice(doc, "sign", SIGNS)
    op = doc.get("operator", {"kind": "identity"})
    if not isinstance(op, dict) or "kind" not in op:
        raise ProblemFileError("operator must be an object with a 'kind'", "$.operator")
    U = decode_matrix(op["U"], fld, "$.operator.U") if "U" in op else None
    for key in ("A", "Q"):
        if key not in doc:
            raise ProblemFileError(f"missing field {key!r}", "$")
    A = decode_matrix(doc["A"], fld, "$.A")
    Q = decode_matrix(doc["Q"], fld, "$.Q")
    try:
        f = MatrixOperatorSpec(op["kind"], U)
        return ProblemSpec(sign, A, Q, f, fld)
    except NMEError as exc:
        raise ProblemFileError(str(exc), "$") from None


def dumps_problem(p):
    return json.dumps(problem_to_dict(p), indent=1) + "\n"


def loads_problem(text, source="<string>"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from None
    try:
        return problem_from_dict(doc)
    except ProblemFileError as exc:
        raise ProblemFileError(str(exc), source) from None


def read_problem(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemFileError(exc.strerror or str(exc), str(path)) from None
    return loads_problem(text, str(path))


def write_problem(p, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_problem(p))


def _json_float(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def result_to_dict(p, res, diag=None):
    out = {
        "status": str(res.status),
        "iterations": res.iterations,
        "effective_index": res.effective_index,
        "residual": _json_float(res.final_residual),
        "X": None if res.X_M is None else encode_matrix(res.X_M, p.field),
        "Y": None if res.Y_M is None else encode_matrix(res.Y_M, p.field),
        "diagnostics": None,
        "warnings": list(res.warnings),
    }
    if res.message:
        out["message"] = res.message
    if diag is not None:
        d = diag.to_dict()
        d["identity_checks"] = {k: _json_float(v) if not isinstance(v, str) else v
                                for k, v in d["identity_checks"].items()}
        out["diagnostics"] = d
    elif res.rho_T1 is not None:
        out["diagnostics"] = {"rho_T1": res.rho_T1}
    return out


def write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")
