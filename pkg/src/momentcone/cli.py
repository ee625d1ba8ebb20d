"""Command-line front end. ``momentcone --help`` lists the subcommands."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from contextlib import nullcontext
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .certify import DEGENERATE, NEGATIVE_WITNESS, STRICTLY_POSITIVE, certify
from .core import IndexSet, close_index_set, is_regular_index_set
from .errors import (EmptyGrid, IndexSetMismatch, IrregularIndexSet, MalformedInput,
                     MomentConeError, NotStrictlyPositive, RegularityViolation)
from .mollify import mollify
from .perturb import perturb_with_report, plan_perturbation
from .quadrature import atomic_moments, density_moments
from .regions import regularity_probe, sample_grid
from .synthesis import BOUNDARY, INTERIOR, NOT_REPRESENTABLE, build_density, classify

log = logging.getLogger("momentcone")

EXIT_USAGE = 64
EXIT_MALFORMED = 65
EXIT_NUMERICAL = 70

_INPUT_ERRORS = (MalformedInput, IrregularIndexSet, IndexSetMismatch, EmptyGrid,
                 RegularityViolation, NotStrictlyPositive)

_CERTIFY_EXIT = {STRICTLY_POSITIVE: 0, DEGENERATE: 1, NEGATIVE_WITNESS: 2}
_CLASSIFY_EXIT = {INTERIOR: 0, BOUNDARY: 1, NOT_REPRESENTABLE: 2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(parser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=d if suppress else 0,
                        help="seed for all stochastic estimators")
    parser.add_argument("--resolution", type=int, default=d, help="grid points per axis")
    parser.add_argument("--tol", type=float, default=d, help="moment / quadrature tolerance")
    parser.add_argument("--json", action="store_true", default=d if suppress else False,
                        help="machine-readable output on stdout")
    parser.add_argument("--threads", type=int, default=d, help="cap on BLAS threads")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="momentcone", description="Moment cone membership and density synthesis.")
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        _common(sp, suppress=True)
        return sp

    sp = add("certify", "strict positivity certificate for a moment vector")
    sp.add_argument("problem")
    sp = add("classify", "interior / boundary / not representable")
    sp.add_argument("problem")
    sp = add("synthesize", "build a density with the given moments")
    sp.add_argument("problem")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--csv", help="also write density samples as CSV")
    sp = add("mollify", "smooth an atomic measure into a density")
    sp.add_argument("measure")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--ensure-positive", action="store_true")
    sp.add_argument("-o", "--output")
    sp.add_argument("--csv")
    sp = add("perturb", "shift a density's moments by beta")
    sp.add_argument("density")
    sp.add_argument("--beta", required=True, help="comma separated, graded-lex order")
    sp.add_argument("--degree", type=int, help="total degree of the index set")
    sp.add_argument("--cells", type=int)
    sp.add_argument("-o", "--output")
    sp.add_argument("--csv")
    sp = add("moments", "moments of a density or measure file")
    sp.add_argument("path")
    sp.add_argument("--degree", type=int, help="total degree (default: the file's index_set)")
    sp = add("probe-regularity", "sample local volumes of a region")
    sp.add_argument("region")
    sp.add_argument("--samples", type=int, default=256)
    sp.add_argument("--eps", default="0.1,0.01,0.001")
    sp = add("close-index-set", "close an index set under coordinate zeroing")
    sp.add_argument("problem")
    return p


def _emit(args, payload: dict, text: str):
    if args.json:
        sys.stdout.write(io.dumps(payload))
    else:
        sys.stdout.write(text.rstrip() + "\n")


def _write_density(args, f, payload):
    out = getattr(args, "output", None)
    if out:
        Path(out).write_text(io.dumps(io.density_to_json(f)))
        payload["output"] = out
    else:
        payload["density"] = io.density_to_json(f)
    if getattr(args, "csv", None):
        res = args.resolution or (1001 if f.dim == 1 else 101)
        pts = sample_grid(f.support, res).points
        vals = f(pts)
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"t{k}" for k in range(f.dim)] + ["density"])
            for row, v in zip(pts, vals):
                w.writerow([repr(float(x)) for x in row] + [repr(float(v))])


def _index_set_for(d: dict, dim: int, degree: Optional[int], n_values: Optional[int] = None):
    if degree is not None:
        return IndexSet.total_degree(degree, dim)
    if "index_set" in d:
        return io.index_set_from_json(d["index_set"])
    if n_values is not None and dim == 1:
        return IndexSet.total_degree(n_values - 1, 1)
    raise UsageError("no index set: pass --degree")


def cmd_certify(args):
    prob = io.problem_from_json(io.load_json(args.problem))
    cert = certify(prob.moments, prob.support, prob.certify_params(args.resolution))
    payload = io.certificate_to_json(cert)
    _emit(args, payload, f"{cert.verdict}  margin={cert.margin:.6g}  cuts={cert.cuts_used}")
    if not cert.converged:
        return 3
    return _CERTIFY_EXIT[cert.verdict]


def cmd_classify(args):
    prob = io.problem_from_json(io.load_json(args.problem))
    cl = classify(prob.moments, prob.support,
                  prob.synthesis_params(args.resolution, args.tol, args.seed))
    _emit(args, io.classification_to_json(cl), f"{cl.verdict}")
    return _CLASSIFY_EXIT.get(cl.verdict, 3)


def cmd_synthesize(args):
    prob = io.problem_from_json(io.load_json(args.problem))
    params = prob.synthesis_params(args.resolution, args.tol, args.seed)
    f = build_density(prob.moments, prob.support, params)
    got = density_moments(f, prob.moments.index_set, seed=args.seed)
    err = float(np.abs(got.values - prob.moments.values).max())
    payload = {"max_moment_error": err, "moments": io.moment_vector_to_json(got)}
    _write_density(args, f, payload)
    _emit(args, payload, f"density written to {args.output}; max moment error {err:.3e}")
    return 0


def cmd_mollify(args):
    d = io.load_json(args.measure)
    nu = io.measure_from_json(d)
    if nu.support is None:
        raise MalformedInput("measure file needs a support region")
    f = mollify(nu, nu.support, args.eps, args.ensure_positive, seed=args.seed)
    payload = {"eps": args.eps}
    _write_density(args, f, payload)
    _emit(args, payload, f"mollified {len(nu)} atoms with eps={args.eps}")
    return 0


def cmd_perturb(args):
    d = io.load_json(args.density)
    f = io.density_from_json(d)
    try:
        beta = np.array([float(v) for v in args.beta.split(",")])
    except ValueError as exc:
        raise UsageError(f"bad --beta: {exc}") from exc
    I = _index_set_for(d, f.dim, args.degree, beta.size)
    if beta.size != len(I):
        raise UsageError(f"--beta has {beta.size} entries; index set has {len(I)}")
    plan = plan_perturbation(f, f.support, I, args.cells or 4 * len(I))
    result = perturb_with_report(f, plan, beta)
    before = density_moments(f, I, args.tol, args.seed)
    after = density_moments(result.density, I, args.tol, args.seed)
    payload = {"report": io.perturbation_report_to_json(result, before, after,
                                                        plan.radius_estimate)}
    _write_density(args, result.density, payload)
    _emit(args, payload, f"delta={result.delta:.4g} k={result.k:.4g} "
                         f"|u|={result.u_sup:.3e} |v|={result.v_sup:.3e}")
    return 0


def cmd_moments(args):
    d = io.load_json(args.path)
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "measure":
        nu = io.measure_from_json(d)
        I = _index_set_for(d, nu.dim, args.degree)
        g = atomic_moments(nu, I)
    elif kind == "density":
        f = io.density_from_json(d)
        I = _index_set_for(d, f.dim, args.degree)
        g = density_moments(f, I, args.tol, args.seed)
    else:
        raise MalformedInput("expected a file with kind 'density' or 'measure'")
    text = "\n".join(f"{list(i)}  {float(v)!r}" for i, v in zip(I, g.values))
    _emit(args, io.moment_vector_to_json(g), text)
    return 0


def cmd_probe(args):
    T = io.region_from_json(io.load_json(args.region))
    try:
        eps = [float(e) for e in args.eps.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --eps: {exc}") from exc
    report = regularity_probe(T, args.samples, eps, seed=args.seed)
    text = "\n".join(f"eps={k:g}: min local volume {v:.3e}" for k, v in report.min_volume.items())
    _emit(args, io.probe_to_json(report), text + f"\n{len(report.violations)} violations")
    return 0 if report.ok else 1


def cmd_close(args):
    d = io.load_json(args.problem)
    I = io.index_set_from_json(io._require(d, "index_set", "problem"))
    closed = close_index_set(I)
    added = [list(i) for i in closed if i not in I]
    payload = {"was_regular": is_regular_index_set(I), "added": added,
               "index_set": io.index_set_to_json(closed)}
    _emit(args, payload, f"{len(closed)} indices ({len(added)} added)")
    return 0


COMMANDS = {"certify": cmd_certify, "classify": cmd_classify, "synthesize": cmd_synthesize,
            "mollify": cmd_mollify, "perturb": cmd_perturb, "moments": cmd_moments,
            "probe-regularity": cmd_probe, "close-index-set": cmd_close}


def _error(args_json: bool, kind: str, message: str, details=None) -> None:
    payload = {"error": {"kind": kind, "message": message, "details": details or {}}}
    stream = sys.stdout if args_json else sys.stderr
    stream.write(io.dumps(payload))


def _threads(n):
    if n is None:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    want_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
    except UsageError as exc:
        _error(want_json, "usage", str(exc))
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with _threads(args.threads):
            return COMMANDS[args.command](args)
    except UsageError as exc:
        _error(args.json, "usage", str(exc))
        return EXIT_USAGE
    except _INPUT_ERRORS as exc:
        _error(args.json, exc.kind, str(exc), exc.details)
        return EXIT_MALFORMED
    except MomentConeError as exc:
        _error(args.json, exc.kind, str(exc), exc.details)
        return EXIT_NUMERICAL
    except (ValueError, TypeError, KeyError) as exc:
        _error(args.json, "malformed_input", f"{type(exc).__name__}: {exc}")
        return EXIT_MALFORMED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
