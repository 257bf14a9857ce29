"""JSON codecs for the workbench value types.

Exact rationals travel as "p/q" strings and every decoder rejects unknown
fields, so a document accepted today parses to the same value tomorrow.
Canonical output (`dump_json`) orders keys alphabetically; byte-identical
inputs therefore yield byte-identical reports.
"""

import json
from fractions import Fraction

import numpy as np

from .compacta import Acc, Gap, Perfect, Points, Union, union_of
from .construction import CoordinateModel
from .errors import ValidationError
from .interval_maps import PiecewiseLinearMap
from .rationals import frac, frac_str
from .shadowing import PseudoOrbit
from .shifts import Sft


def dump_json(doc) -> str:
    """Canonical text form: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from exc


def check_fields(doc, required, optional=(), where="document"):
    """Reject non-dict documents, missing required keys, and unknown keys."""
    if not isinstance(doc, dict):
        raise ValidationError(f"{where} must be a JSON object")
    missing = [k for k in required if k not in doc]
    if missing:
        raise ValidationError(f"{where} is missing field {missing[0]!r}")
    allowed = set(required) | set(optional)
    unknown = [k for k in doc if k not in allowed]
    if unknown:
        raise ValidationError(f"{where} has unknown field {unknown[0]!r}")
    return doc


def frac_to_json(value) -> str:
    return frac_str(frac(value))


def frac_from_json(text) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise ValidationError(f"expected a 'p/q' string, got {text!r}")
    return frac(text)


# ---------------------------------------------------------------------------
# Schemes
# ---------------------------------------------------------------------------


def scheme_to_json(s) -> dict:
    if isinstance(s, Points):
        return {"kind": "points", "points": [frac_to_json(p) for p in s.points]}
    if isinstance(s, Perfect):
        return {"kind": "perfect", "lo": frac_to_json(s.lo), "hi": frac_to_json(s.hi)}
    if isinstance(s, Acc):
        return {
            "kind": "acc",
            "target": frac_to_json(s.target),
            "side": s.side,
            "ratio": frac_to_json(s.ratio),
            "window": frac_to_json(s.window),
            "body": scheme_to_json(s.body),
        }
    if isinstance(s, Union):
        return {"kind": "union", "parts": [scheme_to_json(p) for p in s.parts]}
    raise ValidationError(f"not a scheme: {type(s).__name__}")


def scheme_from_json(doc):
    check_fields(doc, ["kind"], optional=SCHEME_FIELDS, where="scheme")
    kind = doc["kind"]
    if kind == "points":
        check_fields(doc, ["kind", "points"], where="points scheme")
        if not isinstance(doc["points"], list):
            raise ValidationError("'points' must be a list")
        return Points(tuple(frac_from_json(p) for p in doc["points"]))
    if kind == "perfect":
        check_fields(doc, ["kind", "lo", "hi"], where="perfect scheme")
        return Perfect(frac_from_json(doc["lo"]), frac_from_json(doc["hi"]))
    if kind == "acc":
        check_fields(
            doc, ["kind", "target", "side", "ratio", "window", "body"],
            where="acc scheme")
        return Acc(
            frac_from_json(doc["target"]),
            doc["side"],
            frac_from_json(doc["ratio"]),
            frac_from_json(doc["window"]),
            scheme_from_json(doc["body"]),
        )
    if kind == "union":
        check_fields(doc, ["kind", "parts"], where="union scheme")
        if not isinstance(doc["parts"], list):
            raise ValidationError("'parts' must be a list")
        return union_of([scheme_from_json(p) for p in doc["parts"]])
    raise ValidationError(f"unknown scheme kind {kind!r}")


SCHEME_FIELDS = ("points", "lo", "hi", "target", "side", "ratio", "window",
                 "body", "parts")


def gap_to_json(g: Gap) -> dict:
    return {
        "lo": frac_to_json(g.lo),
        "hi": frac_to_json(g.hi),
        "lo_in_set": bool(g.lo_in_set),
        "hi_in_set": bool(g.hi_in_set),
    }


# ---------------------------------------------------------------------------
# Piecewise-linear maps
# ---------------------------------------------------------------------------


def pl_map_to_json(f: PiecewiseLinearMap) -> dict:
    return {
        "breakpoints": [frac_to_json(b) for b in f.breakpoints],
        "values": [frac_to_json(v) for v in f.values],
    }


def pl_map_from_json(doc) -> PiecewiseLinearMap:
    check_fields(doc, ["breakpoints", "values"], where="piecewise-linear map")
    return PiecewiseLinearMap(
        tuple(frac_from_json(b) for b in doc["breakpoints"]),
        tuple(frac_from_json(v) for v in doc["values"]),
    )


# ---------------------------------------------------------------------------
# Vertex shifts
# ---------------------------------------------------------------------------


def sft_to_json(s: Sft) -> dict:
    return {
        "alphabet": list(s.alphabet),
        "allowed": [[bool(x) for x in row] for row in s.matrix],
    }


def sft_from_json(doc) -> Sft:
    check_fields(doc, ["alphabet", "allowed"], where="vertex shift")
    if not isinstance(doc["alphabet"], list) or not isinstance(doc["allowed"], list):
        raise ValidationError("'alphabet' and 'allowed' must be lists")
    return Sft(doc["alphabet"], np.asarray(doc["allowed"], dtype=bool))


# ---------------------------------------------------------------------------
# Pseudo-orbits
# ---------------------------------------------------------------------------


def pseudo_orbit_to_json(po: PseudoOrbit) -> dict:
    """Self-describing array form; rational labels and text labels never mix."""
    kinds = {isinstance(x, Fraction) for x in po.seq}
    if kinds == {True}:
        labels, seq = "rational", [frac_to_json(x) for x in po.seq]
    elif kinds <= {False}:
        labels, seq = "text", [str(x) for x in po.seq]
    else:
        raise ValidationError("pseudo-orbit mixes rational and text labels")
    return {"delta": frac_to_json(po.delta), "labels": labels, "seq": seq}


def pseudo_orbit_from_json(doc) -> PseudoOrbit:
    check_fields(doc, ["delta", "labels", "seq"], where="pseudo-orbit")
    if doc["labels"] == "rational":
        seq = tuple(frac_from_json(x) for x in doc["seq"])
    elif doc["labels"] == "text":
        seq = tuple(str(x) for x in doc["seq"])
    else:
        raise ValidationError(f"unknown label kind {doc['labels']!r}")
    return PseudoOrbit(frac(doc["delta"]), seq)


# ---------------------------------------------------------------------------
# Coordinate models
# ---------------------------------------------------------------------------


def _value_to_json(v):
    return frac_to_json(v) if isinstance(v, Fraction) else str(v)


def model_to_json(m: CoordinateModel) -> dict:
    doc = {
        "scheme": scheme_to_json(m.scheme),
        "L": [frac_to_json(a) for a in m.left_points],
        "abstract_symbols": list(m.symbols),
        "tail_mode": m.tail_mode,
    }
    default = frozenset({frozenset(m.symbols)})
    if {frozenset(e) for e in m.edges} != default:
        doc["edges"] = [sorted(_value_to_json(v) for v in e) for e in m.edges]
    return doc


def model_from_json(doc) -> CoordinateModel:
    check_fields(
        doc, ["scheme", "L", "abstract_symbols", "tail_mode"],
        optional=("edges",), where="coordinate model")
    if not isinstance(doc["L"], list) or not isinstance(doc["abstract_symbols"], list):
        raise ValidationError("'L' and 'abstract_symbols' must be lists")
    symbols = tuple(str(s) for s in doc["abstract_symbols"])
    edges = None
    if "edges" in doc:
        if not isinstance(doc["edges"], list):
            raise ValidationError("'edges' must be a list of value pairs")
        edges = []
        for pair in doc["edges"]:
            if not isinstance(pair, list) or len(pair) != 2:
                raise ValidationError("each edge must be a two-element list")
            edges.append(tuple(
                str(v) if v in symbols else frac(v) for v in pair))
    return CoordinateModel(
        scheme_from_json(doc["scheme"]),
        [frac_from_json(a) for a in doc["L"]],
        tail_mode=str(doc["tail_mode"]),
        edges=edges,
        symbols=symbols,
    )
