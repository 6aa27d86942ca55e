"""Scenario JSON schema (draft 2020-12) and validation helpers.

A scenario bundles one algebra, one group model, one chart, the
representation fields, and a task list. See docs in README for the task
reference; `jsonschema` reports violations with JSON-pointer paths.
"""

import jsonschema

from .errors import ScenarioError

_NUMBER = {"type": "number"}

_SUPERNUMBER = {
    "type": "object",
    "properties": {
        "N": {"type": "integer", "minimum": 0, "maximum": 12},
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "subset": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    "coeff": _NUMBER,
                },
                "required": ["subset", "coeff"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["N", "terms"],
    "additionalProperties": False,
}

_VALUE = {"oneOf": [_NUMBER, _SUPERNUMBER]}
_COORDS = {"type": "array", "items": _VALUE, "minItems": 1}
_REAL_COORDS = {"type": "array", "items": _NUMBER, "minItems": 1}

_G_SPEC = {
    "type": "object",
    "properties": {
        "exp": _COORDS,
        "element": {},
        "word": {"type": "array", "items": _COORDS},
    },
    "minProperties": 1,
    "maxProperties": 1,
    "additionalProperties": False,
}

_PATH_SPEC = {
    "type": "object",
    "properties": {
        "turns": _NUMBER,
        "exp": _COORDS,
        "duration": {"type": "number", "exclusiveMinimum": 0},
        "segments": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"exp": _COORDS, "duration": _NUMBER},
                "required": ["exp"],
                "additionalProperties": False,
            },
        },
        "word": {"type": "array", "items": _COORDS},
    },
    "additionalProperties": False,
}

_TASK = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["validate", "act", "orbit", "diagnose", "leaf"]},
        # act
        "g": _G_SPEC,
        "m": _COORDS,
        "expect": _COORDS,
        "tol": _NUMBER,
        # orbit
        "X": _COORDS,
        "m0": _COORDS,
        "t_span": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
        "csv": {"type": "string"},
        # diagnose sub-checks
        "completeness": {
            "type": "object",
            "properties": {
                "directions": {"type": "array", "items": _REAL_COORDS},
                "horizon": _NUMBER,
                "grid": {"type": "array", "items": _REAL_COORDS},
            },
            "additionalProperties": False,
        },
        "holonomy": {
            "type": "object",
            "properties": {"m0": _REAL_COORDS, "turns": _NUMBER},
            "additionalProperties": False,
        },
        "recover_rho": {
            "type": "object",
            "properties": {"samples": {"type": "integer"}, "h": _NUMBER, "tol": _NUMBER},
            "additionalProperties": False,
        },
        "group_law": {
            "type": "object",
            "properties": {
                "trials": {"type": "integer"},
                "word_length": {"type": "integer"},
                "tol": _NUMBER,
            },
            "additionalProperties": False,
        },
        "path_independence": {
            "type": "object",
            "properties": {
                "g": _G_SPEC,
                "m": _REAL_COORDS,
                "routes": {"type": "array", "items": _PATH_SPEC, "minItems": 2},
                "tol": _NUMBER,
            },
            "additionalProperties": False,
        },
        "sign_duality": {
            "type": "object",
            "properties": {"trials": {"type": "integer"}, "tol": _NUMBER},
            "additionalProperties": False,
        },
        # leaf
        "path": _PATH_SPEC,
        "turns": _NUMBER,
        "stride": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["kind"],
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer"},
        "grassmann_n": {"type": "integer", "minimum": 0, "maximum": 12},
        "fundamental_sign": {"enum": [1, -1]},
        "tolerances": {
            "type": "object",
            "properties": {
                "jacobi": _NUMBER,
                "antisymmetry": _NUMBER,
                "validation": _NUMBER,
                "act": _NUMBER,
                "rtol": _NUMBER,
                "atol": _NUMBER,
            },
            "additionalProperties": False,
        },
        "algebra": {
            "type": "object",
            "properties": {
                "dim": {"type": "integer", "minimum": 1},
                "parities": {"type": "array", "items": {"enum": ["even", "odd"]}},
                "brackets": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "i": {"type": "integer", "minimum": 0},
                            "j": {"type": "integer", "minimum": 0},
                            "coeffs": {
                                "type": "object",
                                "patternProperties": {r"^\d+$": _NUMBER},
                                "additionalProperties": False,
                            },
                        },
                        "required": ["i", "j", "coeffs"],
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["dim", "parities"],
            "additionalProperties": False,
        },
        "group": {
            "type": "object",
            "properties": {
                "model": {"enum": ["euclidean", "matrix", "nilpotent_exp", "circle"]},
                "dim": {"type": "integer", "minimum": 1},
                "size": {"type": "integer", "minimum": 1},
                "class": {"type": "integer", "minimum": 1, "maximum": 4},
                "basis": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "array", "items": _NUMBER}},
                },
            },
            "required": ["model"],
            "additionalProperties": False,
        },
        "chart": {
            "type": "object",
            "properties": {
                "even": {"type": "array", "items": {"type": "string"}},
                "odd": {"type": "array", "items": {"type": "string"}},
                "domain": {
                    "type": "object",
                    "additionalProperties": {
                        "oneOf": [
                            {"const": "all"},
                            {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
                        ]
                    },
                },
                "periodic": {"type": "object", "additionalProperties": _NUMBER},
            },
            "required": ["even"],
            "additionalProperties": False,
        },
        "rho": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "string"}},
        },
        "tasks": {"type": "array", "items": _TASK},
    },
    "required": ["name", "algebra", "group", "chart", "rho", "tasks"],
    "additionalProperties": False,
}


def validate_scenario(obj):
    """Raise ScenarioError with a JSON-pointer path on schema violations."""
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise ScenarioError(f"schema violation at {pointer or '/'}: {e.message}")
