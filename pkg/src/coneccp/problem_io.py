"""Problem-file loading and validation.

Files are JSON documents with a ``kind`` selector; see docs/problem-format.md
for the schema and annotated examples.  Validation failures raise
:class:`SchemaError` with a path-like message.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dc import ComponentwiseDcMatrix, ScalarDcFunction, quadratic_oracle
from .errors import OracleCheckError, SchemaError
from .feasible import FeasibleSet
from .library import (ProblemInstance, _poly_oracle, builtin,
                      diagonal_componentwise, polynomial_constraint_map,
                      quadratic_componentwise, quadratic_sdp)

KINDS = ("builtin", "quadratic_sdp", "scalar_dc_polynomial")


def load_problem(source) -> ProblemInstance:
    """Load an instance from a path, JSON string, or already-parsed dict."""
    if isinstance(source, (str, Path)):
        p = Path(source)
        if p.exists():
            text = p.read_text()
        else:
            text = str(source)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, dict):
        raise SchemaError("problem file must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"kind must be one of {KINDS}, got {kind!r}")
    try:
        if kind == "builtin":
            return _load_builtin(doc)
        if kind == "quadratic_sdp":
            return _load_quadratic(doc)
        return _load_polynomial(doc)
    except (OracleCheckError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def load_componentwise(source) -> tuple[ComponentwiseDcMatrix, FeasibleSet, str]:
    """Entrywise-DC matrix view of a problem file, for the eigenvalue split.

    Univariate polynomial problems (and the example29 builtin) become
    diagonal matrices of their constraint rows; quadratic instances are
    split entrywise by curvature sign.
    """
    if isinstance(source, (str, Path)):
        p = Path(source)
        text = p.read_text() if p.exists() else str(source)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    else:
        doc = source
    kind = doc.get("kind")
    if kind == "builtin" and doc.get("name") == "example29":
        doc = {"kind": "scalar_dc_polynomial", "name": "example29",
               "box": [[-10.0, 10.0]],
               "objective": {"g0": [0.25, -1.0, 1.0], "h0": [0.0]},
               "constraints": [{"G": [0.0, 0.0, 1.0],
                                "H": [0.0, 0.0, 0.0, 0.0, 1.0]}]}
        kind = "scalar_dc_polynomial"
    if kind == "scalar_dc_polynomial":
        inst = _load_polynomial(doc)
        rows = doc["constraints"]
        F = diagonal_componentwise([r["G"] for r in rows],
                                   [r["H"] for r in rows])
        return F, inst.feasible_set, inst.name
    if kind == "quadratic_sdp":
        inst = _load_quadratic(doc)
        con = doc["constraint"]
        d = inst.feasible_set.dim
        order = int(doc["cone"]["psd"])
        C = _symmetric(con["C"], "constraint.C", order)
        B = np.array([_symmetric(Bi, "constraint.B", order)
                      for Bi in con["B"]])
        A = np.array([[_symmetric(con["A"][i][j], "constraint.A", order)
                       for j in range(d)] for i in range(d)])
        return quadratic_componentwise(C, B, A), inst.feasible_set, inst.name
    raise SchemaError(
        "entrywise decomposition needs a scalar_dc_polynomial or "
        "quadratic_sdp problem (or the example29 builtin)")


def _require(doc, key, typ, where="problem file"):
    if key not in doc:
        raise SchemaError(f"{where}: missing key {key!r}")
    val = doc[key]
    if typ is not None and not isinstance(val, typ):
        raise SchemaError(f"{where}: key {key!r} must be {typ}")
    return val


def _load_box(doc) -> FeasibleSet:
    raw = _require(doc, "box", list)
    try:
        arr = np.asarray(raw, dtype=float).reshape(-1, 2)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"box must be a list of [lo, hi] pairs: {exc}")
    if not np.all(np.isfinite(arr)):
        raise SchemaError("box bounds must be finite")
    if np.any(arr[:, 0] > arr[:, 1]):
        raise SchemaError("box has lo > hi")
    return FeasibleSet(arr[:, 0], arr[:, 1])


def _symmetric(raw, name, order=None):
    M = np.asarray(raw, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SchemaError(f"{name} must be a square matrix")
    if order is not None and M.shape[0] != order:
        raise SchemaError(f"{name} must have order {order}")
    if not np.all(np.isfinite(M)):
        raise SchemaError(f"{name} has non-finite entries")
    if np.max(np.abs(M - M.T)) > 1e-8 * (1.0 + np.max(np.abs(M))):
        raise SchemaError(f"{name} is not symmetric")
    return 0.5 * (M + M.T)


def _load_builtin(doc) -> ProblemInstance:
    name = _require(doc, "name", str)
    try:
        return builtin(name)
    except Exception as exc:
        raise SchemaError(str(exc)) from exc


def _psd_quadratic(spec, dim, where):
    P = _symmetric(_require(spec, "P", list, where), f"{where}.P", dim)
    if float(np.linalg.eigvalsh(P)[0]) < -1e-8:
        raise SchemaError(f"{where}.P must be positive semidefinite")
    p = np.asarray(spec.get("p", np.zeros(dim)), dtype=float).reshape(-1)
    if p.size != dim:
        raise SchemaError(f"{where}.p must have length {dim}")
    return quadratic_oracle(P, p, float(spec.get("c", 0.0)))


def _load_quadratic(doc) -> ProblemInstance:
    fs = _load_box(doc)
    d = fs.dim
    con = _require(doc, "constraint", dict)
    cone_desc = _require(doc, "cone", dict)
    if "psd" not in cone_desc:
        raise SchemaError("quadratic_sdp requires a {'psd': l} cone")
    order = int(cone_desc["psd"])
    C = _symmetric(_require(con, "C", list, "constraint"), "constraint.C",
                   order)
    B_raw = _require(con, "B", list, "constraint")
    if len(B_raw) != d:
        raise SchemaError(f"constraint.B must list {d} matrices")
    B = np.array([_symmetric(Bi, f"constraint.B[{i}]", order)
                  for i, Bi in enumerate(B_raw)])
    A_raw = _require(con, "A", list, "constraint")
    if len(A_raw) != d or any(len(row) != d for row in A_raw):
        raise SchemaError(f"constraint.A must be a {d}x{d} grid of matrices")
    A = np.array([[_symmetric(A_raw[i][j], f"constraint.A[{i}][{j}]", order)
                   for j in range(d)] for i in range(d)])
    if np.max(np.abs(A - np.transpose(A, (1, 0, 2, 3)))) > 1e-8:
        raise SchemaError("constraint.A must satisfy A[i][j] == A[j][i]")

    obj = _require(doc, "objective", dict)
    objective = ScalarDcFunction(
        g0=_psd_quadratic(_require(obj, "g0", dict, "objective"), d,
                          "objective.g0"),
        h0=_psd_quadratic(_require(obj, "h0", dict, "objective"), d,
                          "objective.h0"),
        dim=d)
    inst = quadratic_sdp(C=C, B=B, A=A, objective=objective,
                         mu=con.get("mu"), validate=False)
    inst = ProblemInstance(name=doc.get("name", "quadratic_sdp(file)"),
                           objective=inst.objective,
                           constraint=inst.constraint,
                           feasible_set=fs,
                           known_facts=doc.get("known_facts", {}))
    inst.self_check(samples=60)
    return inst


def _coeffs(raw, where):
    arr = np.asarray(raw, dtype=float).reshape(-1)
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise SchemaError(f"{where} must be a nonempty list of finite "
                          "coefficients (ascending powers)")
    return arr


def _load_polynomial(doc) -> ProblemInstance:
    fs = _load_box(doc)
    if fs.dim != 1:
        raise SchemaError("scalar_dc_polynomial is univariate: box needs "
                          "exactly one [lo, hi] pair")
    obj = _require(doc, "objective", dict)
    g0 = _poly_oracle(_coeffs(_require(obj, "g0", list, "objective"),
                              "objective.g0"))
    h0 = _poly_oracle(_coeffs(_require(obj, "h0", list, "objective"),
                              "objective.h0"))
    rows = _require(doc, "constraints", list)
    if not rows:
        raise SchemaError("constraints must list at least one row")
    g_coeffs, h_coeffs = [], []
    for k, row in enumerate(rows):
        if not isinstance(row, dict):
            raise SchemaError(f"constraints[{k}] must be an object")
        g_coeffs.append(_coeffs(_require(row, "G", list, f"constraints[{k}]"),
                                f"constraints[{k}].G"))
        h_coeffs.append(_coeffs(_require(row, "H", list, f"constraints[{k}]"),
                                f"constraints[{k}].H"))
    inst = ProblemInstance(
        name=doc.get("name", "scalar_dc_polynomial(file)"),
        objective=ScalarDcFunction(g0=g0, h0=h0, dim=1),
        constraint=polynomial_constraint_map(g_coeffs, h_coeffs),
        feasible_set=fs,
        known_facts=doc.get("known_facts", {}))
    inst.self_check(samples=80)
    return inst
