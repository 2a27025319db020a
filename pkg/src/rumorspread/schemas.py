"""JSON schemas for every file the package reads or writes."""
from __future__ import annotations

from typing import Any

import jsonschema

from .errors import SchemaViolation

_NUM = {"type": "number"}
_NUM_OR_NULL = {"type": ["number", "null"]}
_DATE = {"type": "string", "pattern": r"^\d{4}-\d{2}-\d{2}$"}

RUMOR_RECORD = {
    "type": "object",
    "required": ["id", "text", "fundamental_entity", "top1_entity", "top2_entity",
                 "outbreak_date", "ner_flags", "resulting_amount"],
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "text": {"type": "string"},
        "fundamental_entity": {"type": "string", "minLength": 1},
        "top1_entity": {"type": "string", "minLength": 1},
        "top2_entity": {"type": "string", "minLength": 1},
        "outbreak_date": _DATE,
        "ner_flags": {
            "type": "object",
            "required": ["PER", "ORG", "LOC", "NZ", "N", "V"],
            "properties": {t: {"type": "boolean"} for t in ("PER", "ORG", "LOC", "NZ", "N", "V")},
            "additionalProperties": False,
        },
        "resulting_amount": {"type": "integer", "minimum": 0},
        "semantic": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
        "labels": {
            "type": "object",
            "required": ["a", "b", "c"],
            "properties": {"a": _NUM, "b": _NUM, "c": _NUM},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

MANIFEST = {
    "type": "object",
    "required": ["schema_version", "rumor_file", "series_directory", "sentiment_file"],
    "properties": {
        "schema_version": {"const": 1},
        "rumor_file": {"type": "string"},
        "series_directory": {"type": "string"},
        "sentiment_file": {"type": "string"},
        "allowlist_file": {"type": ["string", "null"]},
    },
    "additionalProperties": False,
}

FIT_RESULT = {
    "type": "object",
    "required": ["a", "b", "c", "iterations", "rmse", "window_days", "status", "day0_shift"],
    "properties": {
        "a": _NUM, "b": _NUM,
        "c": {"type": "number", "minimum": 0},
        "iterations": {"type": "integer", "minimum": 1},
        "rmse": {"type": "number", "minimum": 0},
        "window_days": {"type": "integer", "minimum": 1},
        "status": {"enum": ["ok", "no_decay"]},
        "day0_shift": {"type": "integer", "minimum": 0},
        "converged": {"type": "boolean"},
    },
    "additionalProperties": False,
}

REASON_CODES = ["no_decay", "degenerate", "window_out_of_range", "zero_traffic",
                "poor_fit", "missing_series"]

FILTER_REPORT = {
    "type": "object",
    "required": ["total", "accepted", "rejections"],
    "properties": {
        "total": {"type": "integer", "minimum": 0},
        "accepted": {"type": "integer", "minimum": 0},
        "rejections": {"type": "object", "additionalProperties": {"enum": REASON_CODES}},
        "fits": {"type": "object", "additionalProperties": FIT_RESULT},
        "config": {"type": "object"},
    },
}

_NODE = {
    "type": "object",
    "required": ["value", "n_samples", "sse"],
    "properties": {
        "value": _NUM, "n_samples": {"type": "integer", "minimum": 1}, "sse": _NUM,
        "feature": {"type": "integer", "minimum": 0}, "threshold": _NUM,
        "left": {"$ref": "#/definitions/node"}, "right": {"$ref": "#/definitions/node"},
    },
    "dependentRequired": {"feature": ["threshold", "left", "right"]},
}

_NORM = {
    "type": "object",
    "required": ["min", "max"],
    "properties": {"min": {"type": "array", "items": _NUM},
                   "max": {"type": "array", "items": _NUM}},
}

MODEL = {
    "definitions": {"node": _NODE},
    "type": "object",
    "required": ["kind", "feature_names", "target", "normalization"],
    "properties": {
        "kind": {"enum": ["linear", "cart"]},
        "feature_names": {"type": "array", "items": {"type": "string"}},
        "target": {"enum": ["a", "b", "c"]},
        "normalization": _NORM,
        "weights": {"type": "array", "items": _NUM},
        "intercept": _NUM,
        "ridge": _NUM,
        "n_features": {"type": "integer"},
        "params": {"type": "object"},
        "root": {"$ref": "#/definitions/node"},
    },
}

CV_RESULT = {
    "type": "object",
    "required": ["model", "target", "k", "seed", "fold_mse", "mean_mse", "std_mse", "folds"],
    "properties": {
        "model": {"enum": ["linear", "cart"]},
        "target": {"enum": ["a", "b", "c"]},
        "k": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer"},
        "fold_mse": {"type": "array", "items": _NUM},
        "mean_mse": _NUM,
        "std_mse": _NUM,
        "folds": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "feature_names": {"type": "array", "items": {"type": "string"}},
        "weight_ranges": {"type": "object"},
    },
}

_CORR_ROW = {
    "type": "object",
    "required": ["feature", "notes"],
    "properties": {"feature": {"type": "string"},
                   "r_a": _NUM_OR_NULL, "r_b": _NUM_OR_NULL, "r_c": _NUM_OR_NULL,
                   "notes": {"type": "array", "items": {"type": "string"}}},
}

REPORT = {
    "type": "object",
    "required": ["weights", "importances", "cv", "correlations"],
    "properties": {
        "weights": {"type": "object", "additionalProperties": _NUM},
        "importances": {"type": "object", "additionalProperties": _NUM},
        "cv": {"type": "object", "additionalProperties": CV_RESULT},
        "correlations": {"type": "array", "items": _CORR_ROW},
        "semantic": {"type": ["object", "null"]},
        "seed": {"type": "integer"},
    },
}


def validate(instance: Any, schema: dict, what: str = "document") -> None:
    try:
        jsonschema.validate(instance, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaViolation(f"{what} invalid at '{path}': {exc.message}") from None
