"""JSON interchange for schemes, tensor schemes, states, tomograms and counts.

Every document carries ``format_version`` and ``kind``.  Complex numbers
are ``[re, im]`` pairs and matrices are lists of rows.  Floats go through
``json``'s shortest round-trip repr, so save followed by load reproduces
every value bit for bit.  Loaders reject documents whose major version
differs from :data:`FORMAT_VERSION`.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import InvalidQuadruple, SchemaVersionMismatch, UnknownPreset, ValidationFailure
from .multiqubit import TensorScheme
from .scheme import Spin12Scheme, build_scheme
from .tolerances import Tolerances
from .tomography import CountRecord, Tomogram

FORMAT_VERSION = "1.0"
INDEX_CONVENTIONS = {
    "g_map": "big-endian base 2, 1-based",
    "f_map": "big-endian base 4, 1-based",
    "R_columns": ["11", "21", "12", "22"],
}

_number = {"type": "number"}
_complex = {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}
_cmatrix = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _complex}}
_header = {
    "format_version": {"type": "string", "pattern": r"^\d+\.\d+$"},
    "kind": {"type": "string"},
}

_SCHEME_BODY = {
    "type": "object",
    "required": ["vectors"],
    "properties": {
        "label": {"type": "string"},
        "vectors": {
            "type": "array",
            "minItems": 4,
            "maxItems": 4,
            "items": {"type": "array", "items": _number, "minItems": 3, "maxItems": 3},
        },
        "tolerances": {"type": "object", "additionalProperties": _number},
        "route": {"enum": ["cramer", "inverse"]},
        "U": {"type": "array", "minItems": 4, "maxItems": 4, "items": _cmatrix},
        "D": {"type": "array", "minItems": 4, "maxItems": 4, "items": _cmatrix},
    },
}

SCHEMAS: dict[str, dict] = {
    "scheme": {
        "type": "object",
        "required": ["format_version", "kind", "vectors"],
        "properties": {**_header, **_SCHEME_BODY["properties"]},
    },
    "tensor_scheme": {
        "type": "object",
        "required": ["format_version", "kind", "n", "factors"],
        "properties": {
            **_header,
            "n": {"type": "integer", "minimum": 1},
            "materialize_limit": {"type": "integer", "minimum": 0},
            "factors": {"type": "array", "minItems": 1, "items": _SCHEME_BODY},
            "conventions": {"type": "object"},
        },
    },
    "state": {
        "type": "object",
        "required": ["format_version", "kind", "dim", "matrix"],
        "properties": {**_header, "dim": {"type": "integer", "minimum": 1}, "matrix": _cmatrix},
    },
    "tomogram": {
        "type": "object",
        "required": ["format_version", "kind", "length", "w"],
        "properties": {
            **_header,
            "scheme_label": {"type": "string"},
            "length": {"type": "integer", "minimum": 1},
            "w": {"type": "array", "items": _number},
            "conventions": {"type": "object"},
        },
    },
    "counts": {
        "type": "object",
        "required": ["format_version", "kind", "shots", "seed", "length", "successes"],
        "properties": {
            **_header,
            "scheme_label": {"type": "string"},
            "shots": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer"},
            "length": {"type": "integer", "minimum": 1},
            "successes": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        },
    },
}

PRESET_VECTORS: dict[str, list[tuple[Fraction, Fraction, Fraction]]] = {
    "example1": [
        (Fraction(0), Fraction(4, 5), Fraction(3, 5)),
        (Fraction(4, 5), Fraction(0), Fraction(-3, 5)),
        (Fraction(0), Fraction(-4, 5), Fraction(3, 5)),
        (Fraction(-4, 5), Fraction(0), Fraction(-3, 5)),
    ],
    "example2": [
        (Fraction(0), Fraction(-2, 3), Fraction(1, 3)),
        (Fraction(2, 3), Fraction(0), Fraction(-1, 3)),
        (Fraction(0), Fraction(2, 3), Fraction(1, 3)),
        (Fraction(-2, 3), Fraction(0), Fraction(-1, 3)),
    ],
}


def _q(num: int, den: int = 1) -> Fraction:
    return Fraction(num, den)


# Exact U and D for the presets, as (re, im) Fraction pairs; used as cross-checks.
REFERENCE_MATRICES: dict[str, dict[str, list]] = {
    "example1": {
        "U": [
            [[(_q(4, 5), 0), (0, _q(-2, 5))], [(0, _q(2, 5)), (_q(1, 5), 0)]],
            [[(_q(1, 5), 0), (_q(2, 5), 0)], [(_q(2, 5), 0), (_q(4, 5), 0)]],
            [[(_q(4, 5), 0), (0, _q(2, 5))], [(0, _q(-2, 5)), (_q(1, 5), 0)]],
            [[(_q(1, 5), 0), (_q(-2, 5), 0)], [(_q(-2, 5), 0), (_q(4, 5), 0)]],
        ],
        "D": [
            [[(_q(2, 3), 0), (0, _q(-5, 8))], [(0, _q(5, 8)), (_q(-1, 6), 0)]],
            [[(_q(-1, 6), 0), (_q(5, 8), 0)], [(_q(5, 8), 0), (_q(2, 3), 0)]],
            [[(_q(2, 3), 0), (0, _q(5, 8))], [(0, _q(-5, 8)), (_q(-1, 6), 0)]],
            [[(_q(-1, 6), 0), (_q(-5, 8), 0)], [(_q(-5, 8), 0), (_q(2, 3), 0)]],
        ],
    },
    "example2": {
        "U": [
            [[(_q(2, 3), 0), (0, _q(1, 3))], [(0, _q(-1, 3)), (_q(1, 3), 0)]],
            [[(_q(1, 3), 0), (_q(1, 3), 0)], [(_q(1, 3), 0), (_q(2, 3), 0)]],
            [[(_q(2, 3), 0), (0, _q(-1, 3))], [(0, _q(1, 3)), (_q(1, 3), 0)]],
            [[(_q(1, 3), 0), (_q(-1, 3), 0)], [(_q(-1, 3), 0), (_q(2, 3), 0)]],
        ],
        "D": [
            [[(_q(1), 0), (0, _q(3, 4))], [(0, _q(-3, 4)), (_q(-1, 2), 0)]],
            [[(_q(-1, 2), 0), (_q(3, 4), 0)], [(_q(3, 4), 0), (_q(1), 0)]],
            [[(_q(1), 0), (0, _q(-3, 4))], [(0, _q(3, 4)), (_q(-1, 2), 0)]],
            [[(_q(-1, 2), 0), (_q(-3, 4), 0)], [(_q(-3, 4), 0), (_q(1), 0)]],
        ],
    },
}


def reference_matrices(name: str, which: str) -> np.ndarray:
    """Exact reference U or D stack for a preset, converted to complex128."""
    if name not in REFERENCE_MATRICES:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {sorted(REFERENCE_MATRICES)}")
    rows = REFERENCE_MATRICES[name][which]
    return np.array([[[complex(float(re), float(im)) for re, im in r] for r in m] for m in rows])


def preset_vectors(name: str) -> np.ndarray:
    try:
        rows = PRESET_VECTORS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {sorted(PRESET_VECTORS)}") from None
    return np.array([[float(x) for x in row] for row in rows])


def preset(name: str, tols: Tolerances | None = None) -> Spin12Scheme:
    """Fully built scheme for one of the bundled example quadruples."""
    return build_scheme(preset_vectors(name), label=name, tols=tols)


# -- encoding helpers ---------------------------------------------------------


def encode_cmatrix(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_cmatrix(data, path: str = "$") -> np.ndarray:
    rows = len(data)
    for i, row in enumerate(data):
        if len(row) != rows:
            raise ValidationFailure(f"row {i} has {len(row)} entries, expected {rows}", path)
    return np.array([[complex(re, im) for re, im in row] for row in data], dtype=np.complex128)


def _validate(doc: Any, kind: str) -> None:
    if not isinstance(doc, dict):
        raise ValidationFailure("document must be a JSON object", "$")
    version = doc.get("format_version")
    if isinstance(version, str) and version.split(".")[0] != FORMAT_VERSION.split(".")[0]:
        raise SchemaVersionMismatch(f"format_version {version!r} is not compatible with {FORMAT_VERSION!r}")
    if doc.get("kind") != kind:
        raise ValidationFailure(f"expected kind {kind!r}, found {doc.get('kind')!r}", "$.kind")
    validator = jsonschema.Draft202012Validator(SCHEMAS[kind])
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
        raise ValidationFailure(err.message, path)


def _header_for(kind: str) -> dict:
    return {"format_version": FORMAT_VERSION, "kind": kind}


# -- scheme ---------------------------------------------------------------------


def _scheme_body(s: Spin12Scheme, include_matrices: bool) -> dict:
    body = {
        "label": s.label,
        "vectors": [[float(x) for x in row] for row in s.vectors],
        "tolerances": s.tols.to_dict(),
        "route": s.route,
    }
    if include_matrices:
        body["U"] = [encode_cmatrix(m) for m in s.U]
        body["D"] = [encode_cmatrix(m) for m in s.D]
    return body


def _scheme_from_body(body: dict, path: str) -> Spin12Scheme:
    tols = Tolerances.from_dict(body.get("tolerances", {}))
    try:
        s = build_scheme(body["vectors"], label=body.get("label", ""), tols=tols, route=body.get("route", "cramer"))
    except InvalidQuadruple as exc:
        raise ValidationFailure(str(exc), f"{path}.vectors") from exc
    for key, regenerated in (("U", s.U), ("D", s.D)):
        if key in body:
            stored = np.array([decode_cmatrix(m, f"{path}.{key}[{i}]") for i, m in enumerate(body[key])])
            if stored.shape != (4, 2, 2):
                raise ValidationFailure(f"expected four 2x2 matrices, got shape {stored.shape}", f"{path}.{key}")
            diff = float(np.max(np.abs(stored - regenerated)))
            if diff > tols.orth_tol:
                raise ValidationFailure(
                    f"stored matrices differ from regeneration by {diff:.3e} (> {tols.orth_tol:.1e})", f"{path}.{key}"
                )
    return s


def scheme_to_dict(s: Spin12Scheme, include_matrices: bool = True) -> dict:
    return {**_header_for("scheme"), **_scheme_body(s, include_matrices), "conventions": INDEX_CONVENTIONS}


def scheme_from_dict(doc: dict) -> Spin12Scheme:
    _validate(doc, "scheme")
    return _scheme_from_body(doc, "$")


# -- tensor scheme --------------------------------------------------------------


def tensor_to_dict(ts: TensorScheme, include_matrices: bool = True) -> dict:
    return {
        **_header_for("tensor_scheme"),
        "n": ts.n,
        "materialize_limit": ts.materialize_limit,
        "factors": [_scheme_body(f, include_matrices) for f in ts.factors],
        "conventions": INDEX_CONVENTIONS,
    }


def tensor_from_dict(doc: dict) -> TensorScheme:
    _validate(doc, "tensor_scheme")
    if len(doc["factors"]) != doc["n"]:
        raise ValidationFailure(f"n = {doc['n']} but {len(doc['factors'])} factors given", "$.factors")
    factors = tuple(_scheme_from_body(f, f"$.factors[{i}]") for i, f in enumerate(doc["factors"]))
    return TensorScheme(factors, doc.get("materialize_limit", 5))


# -- state ----------------------------------------------------------------------


def state_to_dict(rho) -> dict:
    m = np.asarray(rho, dtype=np.complex128)
    return {**_header_for("state"), "dim": int(m.shape[0]), "matrix": encode_cmatrix(m)}


def state_from_dict(doc: dict) -> np.ndarray:
    _validate(doc, "state")
    m = decode_cmatrix(doc["matrix"], "$.matrix")
    if m.shape[0] != doc["dim"]:
        raise ValidationFailure(f"dim = {doc['dim']} but matrix is {m.shape[0]}x{m.shape[0]}", "$.dim")
    return m


# -- tomogram -------------------------------------------------------------------


def tomogram_to_dict(t: Tomogram) -> dict:
    return {
        **_header_for("tomogram"),
        "scheme_label": t.scheme_label,
        "length": len(t.w),
        "w": [float(x) for x in t.w],
        "conventions": INDEX_CONVENTIONS,
    }


def tomogram_from_dict(doc: dict) -> Tomogram:
    _validate(doc, "tomogram")
    if len(doc["w"]) != doc["length"]:
        raise ValidationFailure(f"length = {doc['length']} but w has {len(doc['w'])} entries", "$.length")
    return Tomogram(np.array(doc["w"], dtype=float), doc.get("scheme_label", ""))


# -- counts ---------------------------------------------------------------------


def counts_to_dict(c: CountRecord) -> dict:
    return {
        **_header_for("counts"),
        "scheme_label": c.scheme_label,
        "shots": int(c.shots),
        "seed": int(c.seed),
        "length": len(c.successes),
        "successes": [int(x) for x in c.successes],
    }


def counts_from_dict(doc: dict) -> CountRecord:
    _validate(doc, "counts")
    if len(doc["successes"]) != doc["length"]:
        raise ValidationFailure(
            f"length = {doc['length']} but successes has {len(doc['successes'])} entries", "$.length"
        )
    if any(x > doc["shots"] for x in doc["successes"]):
        raise ValidationFailure("a success count exceeds shots", "$.successes")
    return CountRecord(doc["shots"], np.array(doc["successes"]), doc["seed"], doc.get("scheme_label", ""))


# -- files ----------------------------------------------------------------------

_ENCODERS = {
    "scheme": scheme_to_dict,
    "tensor_scheme": tensor_to_dict,
    "state": state_to_dict,
    "tomogram": tomogram_to_dict,
    "counts": counts_to_dict,
}
_DECODERS = {
    "scheme": scheme_from_dict,
    "tensor_scheme": tensor_from_dict,
    "state": state_from_dict,
    "tomogram": tomogram_from_dict,
    "counts": counts_from_dict,
}


def read_json(path: str | Path) -> Any:
    """Parse a JSON file; OSError and JSONDecodeError propagate to the caller."""
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_json(path: str | Path, doc: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def save(path: str | Path, obj: Any, kind: str) -> None:
    write_json(path, _ENCODERS[kind](obj))


def load(path: str | Path, kind: str) -> Any:
    return _DECODERS[kind](read_json(path))


def load_any(path: str | Path) -> tuple[str, Any]:
    """Load a document of any known kind; returns ``(kind, value)``."""
    doc = read_json(path)
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind not in _DECODERS:
        raise ValidationFailure(f"unknown document kind {kind!r}", "$.kind")
    return kind, _DECODERS[kind](doc)


def save_scheme(path, s: Spin12Scheme, include_matrices: bool = True) -> None:
    write_json(path, scheme_to_dict(s, include_matrices))


def load_scheme(path) -> Spin12Scheme:
    return load(path, "scheme")


def save_tensor(path, ts: TensorScheme, include_matrices: bool = True) -> None:
    write_json(path, tensor_to_dict(ts, include_matrices))


def load_tensor(path) -> TensorScheme:
    return load(path, "tensor_scheme")


def save_state(path, rho) -> None:
    save(path, rho, "state")


def load_state(path) -> np.ndarray:
    return load(path, "state")


def save_tomogram(path, t: Tomogram) -> None:
    save(path, t, "tomogram")


def load_tomogram(path) -> Tomogram:
    return load(path, "tomogram")


def save_counts(path, c: CountRecord) -> None:
    save(path, c, "counts")


def load_counts(path) -> CountRecord:
    return load(path, "counts")

