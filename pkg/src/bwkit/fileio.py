"""JSON file formats: matrices, set specs, ball lists, barycenter problems.

A matrix file is ``{"rows": n, "cols": n, "entries": [[...]], "name": ...?}``
with row-major entries.  Serialization uses Python's shortest round-trip
float repr, so write-then-read reproduces every double exactly.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .barycenter import BarycenterProblem
from .bw_programs import BwBall
from .errors import BwkitError
from .matrix_core import PdMatrix, SymmetricMatrix, as_pd, asmat, symmetrize
from .set_geometry import ConvexSetSpec


class InputFormatError(BwkitError):
    """A JSON input file is missing fields or malformed."""


def matrix_to_obj(M, name: str | None = None) -> dict:
    arr = asmat(M)
    obj = {
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
        "entries": [[float(v) for v in row] for row in arr],
    }
    if name:
        obj["name"] = str(name)
    return obj


def obj_to_matrix(obj) -> SymmetricMatrix:
    if not isinstance(obj, dict):
        raise InputFormatError("matrix object must be a JSON object")
    try:
        rows, cols, entries = obj["rows"], obj["cols"], obj["entries"]
    except KeyError as exc:
        raise InputFormatError(f"matrix object missing field {exc}") from exc
    if rows != cols:
        raise InputFormatError(f"matrix must be square, got {rows}x{cols}")
    arr = np.asarray(entries, dtype=float)
    if arr.shape != (rows, cols):
        raise InputFormatError(
            f"entries shape {arr.shape} does not match {rows}x{cols}"
        )
    return symmetrize(arr)


def write_matrix(path, M, name: str | None = None) -> None:
    text = json.dumps(matrix_to_obj(M, name), indent=1)
    Path(path).write_text(text + "\n")


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from exc


def read_matrix(path) -> SymmetricMatrix:
    return obj_to_matrix(_load_json(path))


def read_pd_matrix(path) -> PdMatrix:
    return as_pd(read_matrix(path))


def read_set_spec(path) -> ConvexSetSpec:
    obj = _load_json(path)
    if "dimension" not in obj:
        raise InputFormatError(f"set spec {path} missing 'dimension'")

    def affine(rows):
        out = []
        for row in rows:
            if "matrix" not in row or "rhs" not in row:
                raise InputFormatError("affine constraint needs 'matrix' and 'rhs'")
            out.append((np.asarray(row["matrix"], dtype=float), float(row["rhs"])))
        return tuple(out)

    ball = None
    if obj.get("frobenius_ball") is not None:
        fb = obj["frobenius_ball"]
        if "center" not in fb or "radius" not in fb:
            raise InputFormatError("frobenius_ball needs 'center' and 'radius'")
        ball = (np.asarray(fb["center"], dtype=float), float(fb["radius"]))
    return ConvexSetSpec(
        dimension=int(obj["dimension"]),
        trace_eq=None if obj.get("trace_eq") is None else float(obj["trace_eq"]),
        linear_eqs=affine(obj.get("linear_eqs", [])),
        linear_ineqs=affine(obj.get("linear_ineqs", [])),
        frobenius_ball=ball,
    )


def read_balls(path) -> list[BwBall]:
    obj = _load_json(path)
    rows = obj.get("balls")
    if not rows:
        raise InputFormatError(f"{path} lists no balls")
    base = Path(path).parent
    out = []
    for row in rows:
        if "center" not in row or "radius_squared" not in row:
            raise InputFormatError("ball needs 'center' and 'radius_squared'")
        center = row["center"]
        if isinstance(center, str):
            matrix = read_matrix(base / center)
        else:
            matrix = obj_to_matrix(center)
        out.append(BwBall(center=as_pd(matrix), radius_squared=float(row["radius_squared"])))
    return out


def read_barycenter_problem(path) -> BarycenterProblem:
    obj = _load_json(path)
    if "weights" not in obj or "matrix_files" not in obj:
        raise InputFormatError(f"{path} needs 'weights' and 'matrix_files'")
    base = Path(path).parent
    matrices = [read_pd_matrix(base / rel) for rel in obj["matrix_files"]]
    constraints = None
    if obj.get("constraints") is not None:
        spec = obj["constraints"]
        if isinstance(spec, str):
            constraints = read_set_spec(base / spec)
        else:
            raise InputFormatError("'constraints' must be a set spec file path")
    return BarycenterProblem(
        weights=tuple(float(w) for w in obj["weights"]),
        matrices=tuple(matrices),
        constraints=constraints,
    )


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def table1_path(name: str) -> Path:
    """Path of a shipped reference-instance fixture file."""
    return Path(resources.files("bwkit") / "data" / "table1" / name)
