"""Regenerate the JSON schemas under schemas/ (one file per artifact kind)."""
import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "schemas"
DRAFT = "https://json-schema.org/draft/2020-12/schema"

num = {"type": "number"}
nums = {"type": "array", "items": num}
points = {"type": "array", "items": nums}
nullable_num = {"type": ["number", "null"]}

DEFS = {
    "index_set": {"type": "array", "minItems": 1,
                  "items": {"type": "array", "minItems": 1,
                            "items": {"type": "integer", "minimum": 0}}},
    "polynomial": {"type": "object", "required": ["index_set", "coefficients"],
                   "properties": {"index_set": {"$ref": "#/$defs/index_set"},
                                  "coefficients": nums}},
    "moment_vector": {"type": "object", "required": ["index_set", "values"],
                      "properties": {"index_set": {"$ref": "#/$defs/index_set"},
                                     "values": nums}},
    "box": {"type": "object", "required": ["type", "lo", "hi"],
            "properties": {"type": {"const": "box"}, "lo": nums, "hi": nums}},
    "region": {"oneOf": [
        {"$ref": "#/$defs/box"},
        {"type": "object", "required": ["type", "center", "radius"],
         "properties": {"type": {"const": "ball"}, "center": nums,
                        "radius": {"type": "number", "exclusiveMinimum": 0}}},
        {"type": "object", "required": ["type", "boxes"],
         "properties": {"type": {"const": "union"},
                        "boxes": {"type": "array", "minItems": 1,
                                  "items": {"$ref": "#/$defs/box"}}}},
        {"type": "object", "required": ["type", "box", "constraints"],
         "properties": {"type": {"const": "semialgebraic"}, "box": {"$ref": "#/$defs/box"},
                        "eta": num,
                        "constraints": {"type": "array",
                                        "items": {"$ref": "#/$defs/polynomial"}}}},
    ]},
    "component": {"oneOf": [
        {"type": "object", "required": ["type", "center", "radius", "scale"],
         "properties": {"type": {"const": "ball"}, "center": nums, "radius": num,
                        "scale": num}},
        {"type": "object", "required": ["type", "scale"],
         "properties": {"type": {"const": "exp_tail"}, "scale": num}},
        {"type": "object", "required": ["type", "lo", "hi", "shape", "values"],
         "properties": {"type": {"const": "grid"}, "lo": nums, "hi": nums,
                        "shape": {"type": "array", "items": {"type": "integer"}},
                        "values": nums}},
        {"type": "object", "required": ["type", "lo", "hi", "values"],
         "properties": {"type": {"const": "cells"}, "lo": points, "hi": points,
                        "values": nums}},
    ]},
    "density": {"type": "object", "required": ["kind", "support", "components"],
                "properties": {"kind": {"const": "density"},
                               "support": {"$ref": "#/$defs/region"},
                               "components": {"type": "array",
                                              "items": {"$ref": "#/$defs/component"}},
                               "index_set": {"$ref": "#/$defs/index_set"}}},
    "measure": {"type": "object", "required": ["kind", "locations", "weights"],
                "properties": {"kind": {"const": "measure"}, "locations": points,
                               "weights": {"type": "array", "items": {"type": "number",
                                                                     "minimum": 0}},
                               "support": {"$ref": "#/$defs/region"},
                               "index_set": {"$ref": "#/$defs/index_set"}}},
    "certificate": {
        "type": "object",
        "required": ["verdict", "margin", "riesz_value", "min_on_T", "cuts_used",
                     "resolution", "converged", "margin_exact", "cut_points"],
        "properties": {
            "verdict": {"enum": ["StrictlyPositive", "Degenerate", "NegativeWitness"]},
            "margin": num, "riesz_value": num, "min_on_T": num,
            "cuts_used": {"type": "integer", "minimum": 0},
            "resolution": {"type": "integer", "minimum": 2},
            "converged": {"type": "boolean"}, "margin_exact": {"type": "boolean"},
            "cut_points": points, "witness": {"$ref": "#/$defs/polynomial"}}},
}

TOP = {
    "problem": {"type": "object", "required": ["index_set", "support"],
                "properties": {"dim": {"type": "integer", "minimum": 1},
                               "index_set": {"$ref": "#/$defs/index_set"},
                               "moments": nums, "support": {"$ref": "#/$defs/region"},
                               "params": {"type": "object", "additionalProperties": False,
                                          "properties": {
                                              "eta": num, "tol_pos": num,
                                              "resolution": {"type": "integer"},
                                              "max_cuts": {"type": "integer"},
                                              "atomic_resolution": {"type": "integer"},
                                              "moment_tol": num}}}},
    "region": {"$ref": "#/$defs/region"},
    "density": {"$ref": "#/$defs/density"},
    "measure": {"$ref": "#/$defs/measure"},
    "certificate": {"$ref": "#/$defs/certificate"},
    "classification": {
        "type": "object", "required": ["verdict", "certificate", "diagnostics"],
        "properties": {"verdict": {"enum": ["InteriorRepresentable", "Boundary",
                                            "NotRepresentable", "Unresolved"]},
                       "certificate": {"$ref": "#/$defs/certificate"},
                       "diagnostics": {"type": "object"},
                       "atomic_witness": {"$ref": "#/$defs/measure"},
                       "density_witness": {"$ref": "#/$defs/density"}}},
    "synthesize": {"type": "object", "required": ["max_moment_error", "moments"],
                   "properties": {"max_moment_error": num,
                                  "moments": {"$ref": "#/$defs/moment_vector"},
                                  "output": {"type": "string"},
                                  "density": {"$ref": "#/$defs/density"}}},
    "mollify": {"type": "object", "required": ["eps"],
                "properties": {"eps": num, "output": {"type": "string"},
                               "density": {"$ref": "#/$defs/density"}}},
    "perturb": {"type": "object", "required": ["report"],
                "properties": {
                    "report": {"type": "object",
                               "required": ["delta", "k", "u_sup", "v_sup",
                                            "radius_estimate", "beta", "moments_before",
                                            "moments_after"],
                               "properties": {"delta": num, "k": num, "u_sup": num,
                                              "v_sup": num, "radius_estimate": num,
                                              "beta": nums,
                                              "moments_before": {"$ref": "#/$defs/moment_vector"},
                                              "moments_after": {"$ref": "#/$defs/moment_vector"}}},
                    "output": {"type": "string"},
                    "density": {"$ref": "#/$defs/density"}}},
    "moments": {"$ref": "#/$defs/moment_vector"},
    "probe_regularity": {
        "type": "object", "required": ["ok", "num_points", "note", "min_volume", "violations"],
        "properties": {"ok": {"type": "boolean"}, "num_points": {"type": "integer"},
                       "note": {"type": "string"},
                       "min_volume": {"type": "array", "items": {
                           "type": "object", "required": ["eps", "volume"],
                           "properties": {"eps": num, "volume": num}}},
                       "violations": {"type": "array", "items": {
                           "type": "object", "required": ["point", "eps", "volume"],
                           "properties": {"point": nums, "eps": num,
                                          "volume": nullable_num}}}}},
    "close_index_set": {"type": "object", "required": ["was_regular", "added", "index_set"],
                        "properties": {"was_regular": {"type": "boolean"},
                                       "added": {"$ref": "#/$defs/index_set"},
                                       "index_set": {"$ref": "#/$defs/index_set"}}},
    "error": {"type": "object", "required": ["error"],
              "properties": {"error": {"type": "object",
                                       "required": ["kind", "message", "details"],
                                       "properties": {"kind": {"type": "string"},
                                                      "message": {"type": "string"},
                                                      "details": {"type": "object"}}}}},
}


def main():
    OUT.mkdir(exist_ok=True)
    for name, body in TOP.items():
        schema = {"$schema": DRAFT, "$id": f"{name}.schema.json", "title": name,
                  **body, "$defs": DEFS}
        (OUT / f"{name}.schema.json").write_text(json.dumps(schema, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
