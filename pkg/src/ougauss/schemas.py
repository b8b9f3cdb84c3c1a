"""JSON schemas (draft 2020-12) for every artifact the command line emits."""

from __future__ import annotations

_NUM = {"type": "number"}
_POINT = {"type": "array", "items": _NUM, "minItems": 1, "maxItems": 3}
_NULLABLE_NUM = {"type": ["number", "null"]}

KERNEL = {
    "type": "object",
    "required": ["command", "part", "index", "n", "results"],
    "additionalProperties": False,
    "properties": {
        "command": {"const": "kernel"},
        "part": {"enum": ["p", "dt", "dx", "dtdx"]},
        "index": {"type": ["integer", "null"], "minimum": 1},
        "n": {"type": "integer", "minimum": 1, "maximum": 3},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["t", "x", "y", "value", "error"],
                "additionalProperties": False,
                "properties": {"t": _NUM, "x": _POINT, "y": _POINT, "value": _NUM, "error": _NUM},
            },
        },
    },
}

ADMISSIBILITY = {
    "type": "object",
    "required": ["admissible", "partial_integrals", "verdict_basis"],
    "additionalProperties": False,
    "properties": {
        "admissible": {"type": "boolean"},
        "partial_integrals": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}},
        "verdict_basis": {"enum": ["CONVERGED", "DIVERGENCE_DETECTED", "INCONCLUSIVE"]},
    },
}

TRANSFORM = {
    "type": "object",
    "required": ["command", "f", "n", "t", "x", "part", "index", "value", "admissibility"],
    "additionalProperties": False,
    "properties": {
        "command": {"const": "transform"},
        "f": {"type": "string"},
        "n": {"type": "integer"},
        "t": _NUM,
        "x": _POINT,
        "part": {"enum": ["p", "dt", "dx", "dtdx"]},
        "index": {"type": ["integer", "null"]},
        "value": _NUM,
        "admissibility": ADMISSIBILITY,
    },
}

CERTIFICATE = {
    "type": "object",
    "required": ["bound_id", "c", "n_samples", "max_ratio", "argmax", "skipped", "stable"],
    "additionalProperties": False,
    "properties": {
        "bound_id": {"enum": ["PROP21", "LEMMA31", "LEMMA32A", "LEMMA32B", "LOCAL_UNIFORM"]},
        "c": {"type": "number", "exclusiveMinimum": 0},
        "n_samples": {"type": "integer", "minimum": 100},
        "max_ratio": {"type": "number", "minimum": 0},
        "argmax": {
            "type": "object",
            "required": ["t", "x", "y"],
            "additionalProperties": False,
            "properties": {"t": _NUM, "x": _POINT, "y": _POINT},
        },
        "skipped": {"type": "integer", "minimum": 0},
        "stable": {"type": "boolean"},
    },
}

SEMINORM = {
    "type": "object",
    "required": ["kind", "value", "arg_t", "arg_x", "arg_y", "alpha", "grid"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["poisson", "holder"]},
        "value": {"type": "number", "minimum": 0},
        "arg_t": _NULLABLE_NUM,
        "arg_x": _POINT,
        "arg_y": {"oneOf": [_POINT, {"type": "null"}]},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "grid": {"type": "object"},
    },
}

_SERIES = {"type": "array", "items": _NUM}

EQUIVALENCE = {
    "type": "object",
    "required": ["A_est", "K_est", "ratio", "both_finite", "A_refined", "K_refined", "A_stable", "K_stable"],
    "additionalProperties": False,
    "properties": {
        "A_est": _NUM,
        "K_est": _NUM,
        "ratio": _NULLABLE_NUM,
        "both_finite": {"type": "boolean"},
        "A_refined": _NUM,
        "K_refined": _NUM,
        "A_stable": {"type": "boolean"},
        "K_stable": {"type": "boolean"},
        "doubling": {
            "type": "object",
            "required": ["radii", "A_values", "K_values", "A_divergent", "K_divergent", "A_growth_exponent",
                         "K_growth_exponent"],
            "additionalProperties": False,
            "properties": {
                "radii": _SERIES,
                "A_values": _SERIES,
                "K_values": _SERIES,
                "A_divergent": {"type": "boolean"},
                "K_divergent": {"type": "boolean"},
                "A_growth_exponent": _NUM,
                "K_growth_exponent": _NUM,
            },
        },
    },
}

CATALOG = {
    "type": "object",
    "required": ["command", "functions"],
    "additionalProperties": False,
    "properties": {
        "command": {"const": "catalog"},
        "functions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "parameter"],
                "additionalProperties": False,
                "properties": {"name": {"type": "string"}, "parameter": {"type": "string"}},
            },
        },
    },
}

ERROR = {
    "type": "object",
    "required": ["error", "message"],
    "properties": {
        "error": {"enum": ["validation", "convergence", "violation"]},
        "message": {"type": "string"},
    },
}

BY_COMMAND = {
    "kernel": KERNEL,
    "transform": TRANSFORM,
    "certify": CERTIFICATE,
    "seminorm": SEMINORM,
    "equivalence": EQUIVALENCE,
    "catalog": CATALOG,
}
