"""JSON encoding of problems, regions, measures, densities and results.

Output is deterministic: keys sorted, floats written with ``repr`` (shortest
round-trip form), fixed indentation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .certify import CertifyParams, PositivityCertificate
from .core import IndexSet, MomentVector, PolynomialI, is_regular_index_set
from .errors import IrregularIndexSet, MalformedInput
from .perturb import PerturbationResult
from .quadrature import (AtomicMeasure, CellFunction, Density, ExpTail, GridFunction,
                         ScaledBallIndicator)
from .regions import Ball, Box, ProbeReport, SemialgebraicInBox, SupportRegion, UnionOfBoxes
from .synthesis import Classification, SynthesisParams


def dumps(obj: Any) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if not np.isfinite(v):
            return None
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise MalformedInput(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON in {path}: {exc}") from exc


def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise MalformedInput(f"{where}: missing field '{key}'")
    return d[key]


def _floats(v, where):
    try:
        arr = np.asarray(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"{where}: expected numbers") from exc
    if not np.all(np.isfinite(arr)):
        raise MalformedInput(f"{where}: values must be finite")
    return arr


# index sets, vectors, polynomials -----------------------------------------

def index_set_to_json(I: IndexSet) -> list:
    return [list(i) for i in I]


def index_set_from_json(v) -> IndexSet:
    if not isinstance(v, list) or not all(isinstance(i, list) for i in v):
        raise MalformedInput("index_set must be a list of integer arrays")
    if not all(isinstance(k, int) and not isinstance(k, bool) for i in v for k in i):
        raise MalformedInput("multi-index entries must be integers")
    return IndexSet(v)


def _reorder(I_in: list, I: IndexSet, values, where):
    vals = _floats(values, where).reshape(-1)
    if vals.shape[0] != len(I_in):
        raise MalformedInput(f"{where}: {vals.shape[0]} values for {len(I_in)} indices")
    if len({tuple(i) for i in I_in}) != len(I_in):
        raise MalformedInput(f"{where}: repeated multi-index")
    out = np.zeros(len(I))
    for i, v in zip(I_in, vals):
        out[I.position(tuple(i))] = v
    return out


def moment_vector_to_json(g: MomentVector) -> dict:
    return {"index_set": index_set_to_json(g.index_set), "values": g.values}


def moment_vector_from_json(d: dict) -> MomentVector:
    raw = _require(d, "index_set", "moment vector")
    I = index_set_from_json(raw)
    return MomentVector(I, _reorder(raw, I, _require(d, "values", "moment vector"),
                                    "moment vector"))


def polynomial_to_json(p: PolynomialI) -> dict:
    return {"index_set": index_set_to_json(p.index_set), "coefficients": p.values}


def polynomial_from_json(d: dict) -> PolynomialI:
    raw = _require(d, "index_set", "polynomial")
    I = index_set_from_json(raw)
    return PolynomialI(I, _reorder(raw, I, _require(d, "coefficients", "polynomial"),
                                   "polynomial"))


# regions --------------------------------------------------------------------

def region_to_json(T: SupportRegion) -> dict:
    if isinstance(T, Box):
        return {"type": "box", "lo": list(T.lo), "hi": list(T.hi)}
    if isinstance(T, Ball):
        return {"type": "ball", "center": list(T.center), "radius": T.radius}
    if isinstance(T, UnionOfBoxes):
        return {"type": "union", "boxes": [region_to_json(b) for b in T.boxes]}
    if isinstance(T, SemialgebraicInBox):
        return {"type": "semialgebraic", "box": region_to_json(T.box), "eta": T.eta,
                "constraints": [polynomial_to_json(q) for q in T.constraints]}
    raise TypeError(f"cannot encode region {type(T).__name__}")


def region_from_json(d: dict) -> SupportRegion:
    kind = _require(d, "type", "region")
    try:
        if kind == "box":
            return Box(_floats(_require(d, "lo", "box"), "box.lo"),
                       _floats(_require(d, "hi", "box"), "box.hi"))
        if kind == "ball":
            return Ball(_floats(_require(d, "center", "ball"), "ball.center"),
                        float(_require(d, "radius", "ball")))
        if kind == "union":
            boxes = [region_from_json(b) for b in _require(d, "boxes", "union")]
            if not all(isinstance(b, Box) for b in boxes):
                raise MalformedInput("union members must be boxes")
            return UnionOfBoxes(tuple(boxes))
        if kind == "semialgebraic":
            box = region_from_json(_require(d, "box", "semialgebraic"))
            cons = tuple(polynomial_from_json(q) for q in _require(d, "constraints",
                                                                   "semialgebraic"))
            return SemialgebraicInBox(box, cons, float(d.get("eta", 0.0)))
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"region: {exc}") from exc
    raise MalformedInput(f"unknown region type {kind!r}")


# measures and densities -------------------------------------------------------

def measure_to_json(nu: AtomicMeasure, T: Optional[SupportRegion] = None) -> dict:
    out = {"kind": "measure", "locations": nu.locations, "weights": nu.weights}
    support = T or nu.support
    if support is not None:
        out["support"] = region_to_json(support)
    return out


def measure_from_json(d: dict) -> AtomicMeasure:
    T = region_from_json(d["support"]) if "support" in d else None
    locs = _floats(_require(d, "locations", "measure"), "measure.locations")
    w = _floats(_require(d, "weights", "measure"), "measure.weights")
    if locs.ndim != 2 or locs.shape[0] != w.shape[0]:
        raise MalformedInput("measure: locations must be a list of points, one per weight")
    return AtomicMeasure(locs, w, T)


def _component_to_json(c) -> dict:
    if isinstance(c, ScaledBallIndicator):
        return {"type": "ball", "center": list(c.center), "radius": c.radius, "scale": c.scale}
    if isinstance(c, ExpTail):
        return {"type": "exp_tail", "scale": c.scale}
    if isinstance(c, GridFunction):
        return {"type": "grid", "lo": list(c.lo), "hi": list(c.hi), "shape": list(c.shape),
                "values": c.values}
    if isinstance(c, CellFunction):
        return {"type": "cells", "lo": c.lo, "hi": c.hi, "values": c.values}
    raise TypeError(f"cannot encode component {type(c).__name__}")


def _component_from_json(d: dict):
    kind = _require(d, "type", "component")
    if kind == "ball":
        return ScaledBallIndicator(tuple(_floats(d["center"], "ball.center")),
                                   float(d["radius"]), float(d["scale"]))
    if kind == "exp_tail":
        return ExpTail(float(d["scale"]))
    if kind == "grid":
        return GridFunction(tuple(_floats(d["lo"], "grid.lo")), tuple(_floats(d["hi"], "grid.hi")),
                            tuple(int(s) for s in d["shape"]), _floats(d["values"], "grid.values"))
    if kind == "cells":
        return CellFunction(_floats(d["lo"], "cells.lo"), _floats(d["hi"], "cells.hi"),
                            _floats(d["values"], "cells.values"))
    raise MalformedInput(f"unknown density component {kind!r}")


def density_to_json(f: Density) -> dict:
    return {"kind": "density", "support": region_to_json(f.support),
            "components": [_component_to_json(c) for c in f.components]}


def density_from_json(d: dict) -> Density:
    T = region_from_json(_require(d, "support", "density"))
    try:
        comps = tuple(_component_from_json(c) for c in _require(d, "components", "density"))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"density component: {exc}") from exc
    for c in comps:
        if isinstance(c, ScaledBallIndicator) and len(c.center) != T.dim:
            raise MalformedInput("ball component dimension differs from support")
    return Density(comps, T)


# problems ---------------------------------------------------------------------

@dataclass
class Problem:
    moments: MomentVector
    support: SupportRegion
    params: dict = field(default_factory=dict)

    def certify_params(self, resolution: Optional[int] = None) -> CertifyParams:
        p = self.params
        return CertifyParams(
            eta=float(p.get("eta", 1e-7)), tol_pos=float(p.get("tol_pos", 1e-6)),
            resolution=resolution or p.get("resolution"),
            max_cuts=int(p.get("max_cuts", 200)))

    def synthesis_params(self, resolution=None, tol=None, seed=0) -> SynthesisParams:
        p = self.params
        return SynthesisParams(
            certify=self.certify_params(resolution),
            atomic_resolution=p.get("atomic_resolution"),
            moment_tol=tol if tol is not None else p.get("moment_tol"),
            seed=seed)


_PARAM_KEYS = {"eta", "tol_pos", "resolution", "max_cuts", "atomic_resolution", "moment_tol"}


def problem_from_json(d: dict, require_moments: bool = True) -> Problem:
    raw = _require(d, "index_set", "problem")
    I = index_set_from_json(raw)
    T = region_from_json(_require(d, "support", "problem"))
    if "dim" in d and d["dim"] != I.dim:
        raise MalformedInput(f"problem: dim {d['dim']} but indices have length {I.dim}")
    if I.dim != T.dim:
        raise MalformedInput("problem: support dimension differs from index set")
    params = d.get("params", {}) or {}
    unknown = set(params) - _PARAM_KEYS
    if unknown:
        raise MalformedInput(f"problem: unknown params {sorted(unknown)}")
    if require_moments and not is_regular_index_set(I):
        raise IrregularIndexSet("index set is not closed under coordinate zeroing; "
                                "run close-index-set")
    if require_moments or "moments" in d:
        g = MomentVector(I, _reorder(raw, I, _require(d, "moments", "problem"), "moments"))
    else:
        g = MomentVector(I, np.zeros(len(I)))
    return Problem(g, T, dict(params))


def problem_to_json(prob: Problem) -> dict:
    return {"dim": prob.moments.index_set.dim,
            "index_set": index_set_to_json(prob.moments.index_set),
            "moments": prob.moments.values, "support": region_to_json(prob.support),
            "params": prob.params}


# results ------------------------------------------------------------------------

def certificate_to_json(c: PositivityCertificate) -> dict:
    out = {"verdict": c.verdict, "margin": c.margin, "riesz_value": c.riesz_value,
           "min_on_T": c.min_on_T, "cuts_used": c.cuts_used, "resolution": c.resolution_used,
           "converged": c.converged, "margin_exact": c.margin_exact,
           "cut_points": c.constraint_points[len(c.constraint_points) - c.cuts_used:]}
    if c.witness is not None:
        out["witness"] = polynomial_to_json(c.witness)
    return out


def classification_to_json(cl: Classification) -> dict:
    out = {"verdict": cl.verdict, "certificate": certificate_to_json(cl.certificate),
           "diagnostics": cl.diagnostics}
    if cl.atomic_witness is not None:
        out["atomic_witness"] = measure_to_json(cl.atomic_witness)
    if cl.density_witness is not None:
        out["density_witness"] = density_to_json(cl.density_witness)
    return out


def probe_to_json(r: ProbeReport) -> dict:
    return {"ok": r.ok, "num_points": r.num_points, "note": r.note,
            "min_volume": [{"eps": k, "volume": v} for k, v in sorted(r.min_volume.items())],
            "violations": r.violations}


def perturbation_report_to_json(r: PerturbationResult, before, after, r_hat) -> dict:
    return {"delta": r.delta, "k": r.k, "u_sup": r.u_sup, "v_sup": r.v_sup,
            "radius_estimate": r_hat, "beta": r.target_shift,
            "moments_before": moment_vector_to_json(before),
            "moments_after": moment_vector_to_json(after)}
