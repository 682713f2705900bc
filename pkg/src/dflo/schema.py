"""JSON file formats for models, programs and initial states.

All mode and Majorana indices in files are 1-based; they are converted to
0-based on load.  Structural problems raise :class:`ParseError` with a
slash-separated ``path`` to the offending element; physically inconsistent
content (e.g. a non-antisymmetric matrix) raises the usual validation errors,
annotated with the same kind of path.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .circuit import Lindblad, Measure, PrepareNumber, PrepareVacuum, Program, Unitary
from .errors import DfloError, DimensionMismatch, ParseError, ProgramError
from .model import (
    LindbladModel,
    LindbladOperator,
    QuadraticHamiltonian,
    hamiltonian_from_dirac,
    jump_from_dirac,
)
from .state import as_covariance, number_state

_NUMBER = {"type": "number"}
_COMPLEX = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}
_INDEX = {"type": "integer", "minimum": 1}
_COUPLING = {
    "type": "array",
    "prefixItems": [_INDEX, _INDEX, _NUMBER, _NUMBER],
    "items": False,
    "minItems": 3,
}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _NUMBER}}

HAMILTONIAN_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"majorana": _MATRIX},
            "required": ["majorana"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "dirac": {
                    "type": "object",
                    "properties": {
                        "energies": {"type": "array", "items": _NUMBER},
                        "hoppings": {"type": "array", "items": _COUPLING},
                        "pairings": {"type": "array", "items": _COUPLING},
                    },
                    "additionalProperties": False,
                }
            },
            "required": ["dirac"],
            "additionalProperties": False,
        },
    ]
}

JUMP_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"majorana": {"type": "array", "items": _COMPLEX}},
            "required": ["majorana"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "dirac": {
                    "type": "object",
                    "properties": {
                        "adag": {"type": "array", "items": _COMPLEX},
                        "a": {"type": "array", "items": _COMPLEX},
                    },
                    "additionalProperties": False,
                }
            },
            "required": ["dirac"],
            "additionalProperties": False,
        },
    ]
}

MODEL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "modes": {"type": "integer", "minimum": 1},
        "hamiltonian": HAMILTONIAN_SCHEMA,
        "lindblad": {"type": "array", "items": JUMP_SCHEMA},
    },
    "required": ["modes"],
    "additionalProperties": False,
}

_BACKENDS = ["auto", "lyapunov", "homogeneous", "third_quantized"]
_TIME = {"type": "number", "minimum": 0}


def _gate(op: str, props: dict, required: list[str]) -> dict:
    return {
        "type": "object",
        "properties": {"op": {"const": op}, **props},
        "required": ["op", *required],
        "additionalProperties": False,
    }


GATE_SCHEMA = {
    "type": "object",
    "required": ["op"],
    "properties": {
        "op": {"enum": ["prepare_vacuum", "prepare_number", "unitary", "lindblad", "measure"]}
    },
    "allOf": [
        {"if": {"properties": {"op": {"const": "prepare_vacuum"}}}, "then": _gate("prepare_vacuum", {}, [])},
        {
            "if": {"properties": {"op": {"const": "prepare_number"}}},
            "then": _gate("prepare_number", {"bits": {"type": "array", "items": {"enum": [0, 1]}}}, ["bits"]),
        },
        {
            "if": {"properties": {"op": {"const": "unitary"}}},
            "then": _gate("unitary", {"hamiltonian": HAMILTONIAN_SCHEMA, "t": _TIME}, ["hamiltonian", "t"]),
        },
        {
            "if": {"properties": {"op": {"const": "lindblad"}}},
            "then": _gate(
                "lindblad",
                {"model": MODEL_SCHEMA, "t": _TIME, "backend": {"enum": _BACKENDS}},
                ["model", "t"],
            ),
        },
        {
            "if": {"properties": {"op": {"const": "measure"}}},
            "then": _gate("measure", {"modes": {"type": "array", "items": _INDEX}}, ["modes"]),
        },
    ],
}

PROGRAM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "modes": {"type": "integer", "minimum": 1},
        "gates": {"type": "array", "items": GATE_SCHEMA, "minItems": 1},
    },
    "required": ["modes", "gates"],
    "additionalProperties": False,
}

STATE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "oneOf": [
        _MATRIX,
        {
            "type": "object",
            "properties": {"bits": {"type": "array", "items": {"enum": [0, 1]}, "minItems": 1}},
            "required": ["bits"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"covariance": _MATRIX},
            "required": ["covariance"],
            "additionalProperties": False,
        },
    ],
}


def _join(*parts) -> str:
    return "/".join(str(p) for p in parts if p != "")


def _check(obj: Any, schema: dict, base: str = "") -> None:
    validator = jsonschema.Draft202012Validator(schema)
    best = jsonschema.exceptions.best_match(validator.iter_errors(obj))
    if best is not None:
        raise ParseError(best.message, _join(base, *best.absolute_path))


def _annotate(exc: DfloError, path: str) -> DfloError:
    if not getattr(exc, "path", ""):
        exc.path = path
    return exc


def load_json(path: str | Path) -> Any:
    """Read a JSON document, mapping I/O and syntax problems to :class:`ParseError`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", str(path)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})",
            f"{path}:{exc.lineno}:{exc.colno}",
        ) from exc


def _pair(z) -> complex:
    return complex(z[0], z[1])


def _matrix(rows, path: str) -> np.ndarray:
    if len({len(r) for r in rows}) > 1:
        raise ParseError("matrix rows have different lengths", path)
    return np.array(rows, dtype=float).reshape(len(rows), -1)


def _couplings(rows) -> list[tuple[int, int, complex]]:
    # [j, k, re, im] with 1-based modes; im may be omitted
    return [(r[0] - 1, r[1] - 1, complex(r[2], r[3] if len(r) > 3 else 0.0)) for r in rows]


def hamiltonian_from_obj(obj: dict, modes: int, base: str = "hamiltonian") -> QuadraticHamiltonian:
    _check(obj, HAMILTONIAN_SCHEMA, base)
    try:
        if "majorana" in obj:
            h = _matrix(obj["majorana"], _join(base, "majorana"))
            if h.shape != (2 * modes, 2 * modes):
                raise DimensionMismatch(f"expected a {2 * modes}x{2 * modes} matrix, got shape {h.shape}")
            return QuadraticHamiltonian(h)
        d = obj["dirac"]
        energies = d.get("energies", [])
        if len(energies) not in (0, modes):
            raise ParseError(f"expected {modes} energies, got {len(energies)}", _join(base, "dirac", "energies"))
        return hamiltonian_from_dirac(
            modes,
            list(enumerate(energies)),
            _couplings(d.get("hoppings", [])),
            _couplings(d.get("pairings", [])),
        )
    except DfloError as exc:
        raise _annotate(exc, base)


def jump_from_obj(obj: dict, modes: int, base: str) -> LindbladOperator:
    _check(obj, JUMP_SCHEMA, base)
    try:
        if "majorana" in obj:
            coeffs = [_pair(z) for z in obj["majorana"]]
            if len(coeffs) != 2 * modes:
                raise DimensionMismatch(f"expected {2 * modes} coefficients, got {len(coeffs)}")
            return LindbladOperator(np.array(coeffs))
        d = obj["dirac"]
        zeros = [[0.0, 0.0]] * modes
        adag = [_pair(z) for z in d.get("adag", zeros)]
        a = [_pair(z) for z in d.get("a", zeros)]
        return jump_from_dirac(modes, adag, a)
    except DfloError as exc:
        raise _annotate(exc, base)


def model_from_obj(obj: Any, base: str = "") -> LindbladModel:
    """Build a :class:`LindbladModel` from its parsed JSON form."""
    _check(obj, MODEL_SCHEMA, base)
    n = obj["modes"]
    if "hamiltonian" in obj:
        ham = hamiltonian_from_obj(obj["hamiltonian"], n, _join(base, "hamiltonian"))
    else:
        ham = QuadraticHamiltonian.zero(n)
    jumps = tuple(
        jump_from_obj(j, n, _join(base, "lindblad", k)) for k, j in enumerate(obj.get("lindblad", []))
    )
    return LindbladModel(ham, jumps)


def program_from_obj(obj: Any) -> Program:
    """Build a :class:`Program` from its parsed JSON form (1-based modes)."""
    _check(obj, PROGRAM_SCHEMA)
    n = obj["modes"]
    gates = []
    for i, g in enumerate(obj["gates"]):
        base = _join("gates", i)
        op = g["op"]
        if op == "prepare_vacuum":
            gates.append(PrepareVacuum())
        elif op == "prepare_number":
            gates.append(PrepareNumber(g["bits"]))
        elif op == "unitary":
            gates.append(Unitary(hamiltonian_from_obj(g["hamiltonian"], n, _join(base, "hamiltonian")), g["t"]))
        elif op == "lindblad":
            gates.append(Lindblad(model_from_obj(g["model"], _join(base, "model")), g["t"], g.get("backend", "auto")))
        else:
            for k, j in enumerate(g["modes"]):
                if j > n:
                    raise ProgramError(f"mode {j} out of range for {n} modes", i)
            gates.append(Measure([j - 1 for j in g["modes"]]))
    try:
        return Program(n, gates)
    except DfloError as exc:
        idx = getattr(exc, "gate_index", None)
        raise _annotate(exc, _join("gates", idx) if idx is not None else "")


def state_from_obj(obj: Any) -> np.ndarray:
    """Initial state from ``{"bits": [...]}``, ``{"covariance": [[...]]}`` or a bare matrix."""
    _check(obj, STATE_SCHEMA)
    try:
        if isinstance(obj, dict) and "bits" in obj:
            return number_state(obj["bits"])
        mat = obj["covariance"] if isinstance(obj, dict) else obj
        return as_covariance(_matrix(mat, "covariance" if isinstance(obj, dict) else ""))
    except DfloError as exc:
        raise _annotate(exc, "covariance" if isinstance(obj, dict) else "")


def _load(path: str | Path, builder):
    obj = load_json(path)
    try:
        return builder(obj)
    except DfloError as exc:
        # file name plus JSON-pointer-style location inside the document
        exc.path = f"{path}#/{getattr(exc, 'path', '') or ''}"
        raise


def load_model(path: str | Path) -> LindbladModel:
    return _load(path, model_from_obj)


def load_program(path: str | Path) -> Program:
    return _load(path, program_from_obj)


def load_state(path: str | Path) -> np.ndarray:
    return _load(path, state_from_obj)
