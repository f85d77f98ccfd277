"""JSON model files and analysis reports.

Both model kinds share an envelope ``{"format_version": "1", "kind": ...}``.
Weights are JSON numbers or the string "+inf"; no other non-finite literal is
accepted. Structure is checked with a JSON schema, then the model itself is
validated (stochastic rows, index ranges, cone invariants).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from .abstraction import GuardEdge, InvalidPphs, Location, Pphs, validate_pphs
from .mdp import INF, Action, Violation, Wmdp, validate
from .polyhedra import ConeInvariant, Polyhedron

FORMAT_VERSION = "1"


class ParseError(ValueError):
    pass


class SchemaError(ValueError):
    pass


class ValidationError(ValueError):
    def __init__(self, message: str, violations: list[Violation] | None = None):
        super().__init__(message)
        self.violations = violations or []


_NUMBER_OR_INF = {"oneOf": [{"type": "number"}, {"const": "+inf"}]}
_DIST = {"type": "object", "patternProperties": {"^[0-9]+$": {"type": "number"}},
         "additionalProperties": False, "minProperties": 1}
_ROW = {"type": "array", "minItems": 3,
        "items": {"anyOf": [{"type": "number"}, {"enum": ["<=", ">=", "="]}]}}

WMDP_SCHEMA = {
    "type": "object",
    "required": ["format_version", "kind", "states", "init", "actions"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "kind": {"const": "wmdp"},
        "states": {"type": "integer", "minimum": 1},
        "init": {"type": "integer", "minimum": 0},
        "actions": {
            "type": "array",
            "items": {"type": "array", "items": {
                "type": "object", "required": ["dist", "weight"],
                "properties": {"dist": _DIST, "weight": _NUMBER_OR_INF,
                               "label": {"type": "string"}},
                "additionalProperties": False}},
        },
        "states_info": {"type": "array"},
    },
    "additionalProperties": False,
}

PPHS_SCHEMA = {
    "type": "object",
    "required": ["format_version", "kind", "dim", "locations", "edges", "init"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "kind": {"const": "pphs"},
        "dim": {"type": "integer", "minimum": 1},
        "locations": {"type": "array", "minItems": 1, "items": {
            "type": "object", "required": ["invariant", "flow"],
            "properties": {"invariant": {"type": "array", "items": _ROW},
                           "flow": {"type": "array", "items": _ROW},
                           "name": {"type": "string"}},
            "additionalProperties": False}},
        "edges": {"type": "array", "items": {
            "type": "object", "required": ["loc", "facet_index", "dist"],
            "properties": {"loc": {"type": "integer", "minimum": 0},
                           "facet_index": {"type": "integer", "minimum": 0},
                           "dist": _DIST},
            "additionalProperties": False}},
        "init": {"type": "object", "required": ["loc", "point"],
                 "properties": {"loc": {"type": "integer", "minimum": 0},
                                "point": {"type": "array", "items": {"type": "number"}}},
                 "additionalProperties": False},
    },
    "additionalProperties": False,
}


def _check_schema(doc: Any, schema: dict) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            lines.append(f"at {where}: {e.message}")
        raise SchemaError("; ".join(lines))


def _weight(v) -> float:
    return INF if v == "+inf" else float(v)


def _rows(dim: int, rows: list, what: str, loc: int) -> Polyhedron:
    for r in rows:
        ok = (len(r) == dim + 2 and isinstance(r[dim], str)
              and all(isinstance(v, (int, float)) for v in r[:dim] + [r[dim + 1]]))
        if not ok:
            raise ValidationError(
                f"location {loc}: {what} row {r} must be {dim} coefficients, a relation and an offset")
    try:
        return Polyhedron.from_rows(dim, rows)
    except ValueError as exc:
        raise ValidationError(f"location {loc}: {what}: {exc}") from exc


def wmdp_from_dict(doc: dict) -> Wmdp:
    _check_schema(doc, WMDP_SCHEMA)
    rows = []
    for acts in doc["actions"]:
        rows.append(tuple(Action({int(k): float(p) for k, p in a["dist"].items()},
                                 _weight(a["weight"]), a.get("label")) for a in acts))
    n = doc["states"]
    if len(rows) != n:
        raise ValidationError(f"'actions' lists {len(rows)} states but 'states' is {n}")
    m = Wmdp(n, tuple(rows), doc["init"])
    bad = validate(m)
    if bad:
        raise ValidationError("; ".join(str(v) for v in bad), bad)
    return m


def pphs_from_dict(doc: dict) -> Pphs:
    _check_schema(doc, PPHS_SCHEMA)
    dim = doc["dim"]
    locations = []
    for q, loc in enumerate(doc["locations"]):
        inv = _rows(dim, loc["invariant"], "invariant", q)
        if not inv.is_cone:
            raise ValidationError(f"location {q}: invariant not a cone")
        flow = _rows(dim, loc["flow"], "flow", q)
        locations.append(Location(ConeInvariant(inv), flow, loc.get("name")))
    edges = tuple(GuardEdge(e["loc"], e["facet_index"], {int(k): float(p) for k, p in e["dist"].items()})
                  for e in doc["edges"])
    H = Pphs(dim, tuple(locations), edges, doc["init"]["loc"],
             tuple(float(v) for v in doc["init"]["point"]))
    bad = validate_pphs(H)
    if bad:
        raise ValidationError("; ".join(str(v) for v in bad), bad)
    return H


def loads(text: str) -> Wmdp | Pphs:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or doc.get("kind") not in ("wmdp", "pphs"):
        raise SchemaError("model file must be an object with kind 'wmdp' or 'pphs'")
    if doc["kind"] == "wmdp":
        return wmdp_from_dict(doc)
    return pphs_from_dict(doc)


def parse_model(path: str | Path) -> Wmdp | Pphs:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 text") from exc
    return loads(text)


def _enc_weight(w: float):
    if w == INF:
        return "+inf"
    if not math.isfinite(w):
        raise ValueError(f"weight {w} cannot be serialised")
    return w


def wmdp_to_dict(m: Wmdp, states_info: list | None = None) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "wmdp",
        "states": m.n_states,
        "init": m.init,
        "actions": [[{"dist": {str(t): p for t, p in sorted(a.dist.items())},
                      "weight": _enc_weight(a.weight),
                      **({"label": a.label} if a.label else {})} for a in acts]
                    for acts in m.actions],
    }
    if states_info is not None:
        doc["states_info"] = states_info
    return doc


def pphs_to_dict(H: Pphs) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "pphs",
        "dim": H.dim,
        "locations": [{"invariant": loc.invariant.base.to_rows(), "flow": loc.flow.to_rows(),
                       **({"name": loc.name} if loc.name else {})} for loc in H.locations],
        "edges": [{"loc": e.loc, "facet_index": e.facet_index,
                   "dist": {str(t): p for t, p in sorted(e.dist.items())}} for e in H.edges],
        "init": {"loc": H.init_loc, "point": list(H.init_point)},
    }


def dumps(model: Wmdp | Pphs, **extra) -> str:
    doc = wmdp_to_dict(model, **extra) if isinstance(model, Wmdp) else pphs_to_dict(model)
    return json.dumps(doc, indent=1)


def encode_value(x: float | None):
    if x is None:
        return None
    if x == INF:
        return "+inf"
    if x == -INF:
        return "-inf"
    return x + 0.0  # turns -0.0 into 0.0


@dataclass
class Report:
    verdict: str | None = None
    max_mean_payoff: float | None = None
    diagnostics: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {}
        if self.verdict is not None:
            out["verdict"] = self.verdict
        if self.max_mean_payoff is not None:
            out["max_mean_payoff"] = encode_value(self.max_mean_payoff)
        out["diagnostics"] = list(self.diagnostics)
        out["timings"] = dict(self.timings)
        out.update(self.details)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_text(self) -> str:
        lines = []
        if self.verdict is not None:
            lines.append(f"verdict            {self.verdict}")
        if self.max_mean_payoff is not None:
            lines.append(f"max mean payoff    {encode_value(self.max_mean_payoff)}")
        for k, v in self.details.items():
            if isinstance(v, (dict, list)):
                v = json.dumps(v)
            lines.append(f"{k:<18} {v}")
        for k, v in self.timings.items():
            lines.append(f"{k:<18} {v:.6f} s")
        for d in self.diagnostics:
            lines.append(f"note: {d}")
        return "\n".join(lines)


__all__ = ["ParseError", "SchemaError", "ValidationError", "InvalidPphs", "Report",
           "parse_model", "loads", "dumps", "wmdp_to_dict", "pphs_to_dict"]
