"""JSON documents for spaces, pseudometrics and oracle specs.

Rationals travel as strings (``"3/4"``); plain integers are accepted on
input.  JSON floats are rejected outright.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .core import FiniteSpace, Pseudometric, UPair, as_scalar
from .recover import (
    MetricMapOracle,
    compose,
    induced_oracle,
    scaling_oracle,
    translation_oracle,
)


class DocumentError(ValueError):
    """Malformed input document (exit code 2 at the command line)."""


def format_scalar(q: Fraction) -> str:
    return str(q)


def display_scalar(q: Fraction, as_float: bool = False, digits: int = 6):
    if as_float:
        return round(float(q), digits)
    return str(q)


def parse_scalar(value) -> Fraction:
    if isinstance(value, float):
        raise DocumentError(f"float {value!r} not accepted; write it as a rational string")
    try:
        return as_scalar(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"bad rational {value!r}: {exc}") from None


def parse_matrix(raw) -> list[list[Fraction]]:
    if not isinstance(raw, list) or not all(isinstance(r, list) for r in raw):
        raise DocumentError("matrix must be a list of lists")
    return [[parse_scalar(v) for v in row] for row in raw]


def matrix_to_doc(rows, as_float: bool = False) -> list[list]:
    return [[display_scalar(v, as_float) for v in row] for row in rows]


def load_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DocumentError(f"{path}: top level must be an object")
    return doc


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False)


def _labels(doc, n: int) -> tuple[str, ...]:
    points = doc.get("points")
    if points is None:
        return tuple(str(i) for i in range(n))
    if not isinstance(points, list) or not all(isinstance(p, str) for p in points):
        raise DocumentError("points must be a list of strings")
    if len(points) != n:
        raise DocumentError(f"{len(points)} labels for a {n}x{n} matrix")
    return tuple(points)


def space_from_doc(doc: dict) -> FiniteSpace:
    if "ambient" not in doc:
        raise DocumentError("space document needs an 'ambient' matrix")
    m = parse_matrix(doc["ambient"])
    labels = _labels(doc, len(m))
    return FiniteSpace(labels, Pseudometric(m))


def space_to_doc(space: FiniteSpace) -> dict:
    return {"points": list(space.points), "ambient": matrix_to_doc(space.ambient.rows)}


def metric_from_doc(doc: dict) -> tuple[tuple[str, ...], list[list[Fraction]]]:
    """Labels and the raw (unvalidated) matrix of a pseudometric document."""
    if "matrix" not in doc:
        raise DocumentError("pseudometric document needs a 'matrix'")
    m = parse_matrix(doc["matrix"])
    return _labels(doc, len(m)), m


def metric_to_doc(d: Pseudometric, labels, as_float: bool = False) -> dict:
    return {"points": list(labels), "matrix": matrix_to_doc(d.rows, as_float)}


def reorder_to_space(space: FiniteSpace, labels, m) -> list[list[Fraction]]:
    """Permute a labelled matrix into the space's point order."""
    if sorted(labels) != sorted(space.points):
        raise DocumentError("matrix labels do not match the space's points")
    pos = [labels.index(p) for p in space.points]
    return [[m[a][b] for b in pos] for a in pos]


def parse_pair(space: FiniteSpace, text: str) -> UPair:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise DocumentError(f"pair must look like 'a,b', got {text!r}")
    try:
        return space.pair(*parts)
    except KeyError as exc:
        raise DocumentError(str(exc)) from None


# oracle specs ---------------------------------------------------------------

ORACLE_KINDS = ("induced", "translation", "scaling", "matrix_permutation", "composite")


def oracle_from_spec(spec: dict, X: FiniteSpace, Y: FiniteSpace) -> MetricMapOracle:
    """Build an oracle from a declarative spec.

    ``composite`` parts are applied in order; the first maps X to Y and the
    rest map Y to Y.
    """
    if not isinstance(spec, dict):
        raise DocumentError("oracle spec must be an object")
    kind = spec.get("kind")
    if kind not in ORACLE_KINDS:
        raise DocumentError(f"unknown oracle kind {kind!r}; expected one of {', '.join(ORACLE_KINDS)}")
    if kind == "induced":
        label_map = spec.get("map")
        if not isinstance(label_map, dict):
            raise DocumentError("induced oracle needs a 'map' from codomain labels to domain labels")
        try:
            phi = [X.index(label_map[y]) for y in Y.points]
        except KeyError as exc:
            raise DocumentError(f"induced map: missing or unknown label {exc}") from None
        try:
            return induced_oracle(X, Y, phi)
        except ValueError as exc:
            raise DocumentError(f"induced map: {exc}") from None
    if kind == "matrix_permutation":
        perm = spec.get("permutation")
        if not isinstance(perm, list) or not all(isinstance(v, int) for v in perm):
            raise DocumentError("matrix_permutation needs an integer 'permutation' list")
        try:
            return induced_oracle(X, Y, perm)
        except ValueError as exc:
            raise DocumentError(f"matrix_permutation: {exc}") from None
    if kind == "translation":
        if X.n != Y.n:
            raise DocumentError("translation needs equally sized spaces")
        offset = spec.get("offset")
        if not isinstance(offset, dict):
            raise DocumentError("translation needs an 'offset' pseudometric document")
        _, m = metric_from_doc(offset)
        return translation_oracle(Y, Pseudometric(m))
    if kind == "scaling":
        if X.n != Y.n:
            raise DocumentError("scaling needs equally sized spaces")
        factor = parse_scalar(spec.get("factor", 1))
        if factor < 0:
            raise DocumentError("scaling factor must be nonnegative")
        return scaling_oracle(Y, factor)
    parts = spec.get("parts")
    if not isinstance(parts, list) or not parts:
        raise DocumentError("composite needs a nonempty 'parts' list")
    oracle = oracle_from_spec(parts[0], X, Y)
    for part in parts[1:]:
        oracle = compose(oracle, oracle_from_spec(part, Y, Y))
    return oracle


# tagged values for counterexample replay -----------------------------------------


def encode_value(v):
    if isinstance(v, Pseudometric):
        return {"$metric": matrix_to_doc(v.rows)}
    if isinstance(v, FiniteSpace):
        return {"$space": space_to_doc(v)}
    if isinstance(v, UPair):
        return {"$pair": [v.i, v.j]}
    if isinstance(v, Fraction):
        return {"$q": format_scalar(v)}
    if isinstance(v, (list, tuple)):
        return [encode_value(x) for x in v]
    if isinstance(v, dict):
        return {k: encode_value(x) for k, x in v.items()}
    if isinstance(v, (int, str, bool)) or v is None:
        return v
    raise TypeError(f"cannot encode {type(v).__name__}")


def decode_value(v):
    if isinstance(v, list):
        return [decode_value(x) for x in v]
    if isinstance(v, dict):
        if "$metric" in v:
            return Pseudometric(parse_matrix(v["$metric"]))
        if "$space" in v:
            return space_from_doc(v["$space"])
        if "$pair" in v:
            return UPair.of(*v["$pair"])
        if "$q" in v:
            return parse_scalar(v["$q"])
        return {k: decode_value(x) for k, x in v.items()}
    return v
