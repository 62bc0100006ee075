"""Command-line interface: ``geocomplete {classify|analyze|integrate|first-integrals|idempotents|batch|preset}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import errors
from .analysis import FIELD_KINDS, analyze, form_terms, random_unit_starts, select_field
from .completeness import Status
from .lie3 import classify, signature_str
from .odeint import IntegrateOptions, integrate, write_csv
from .quadfield import find_idempotents, idempotent_residual, invariant_directions, quadratic_first_integrals
from .specio import PRESETS, dumps, load_spec

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_DEGENERATE_METRIC = 4
EXIT_INTEGRATOR = 5
EXIT_INCOMPLETE = 10
EXIT_UNDECIDED = 20
EXIT_BATCH_FAILURE = 1

STATUS_EXIT = {Status.COMPLETE: EXIT_OK, Status.INCOMPLETE: EXIT_INCOMPLETE, Status.UNDECIDED: EXIT_UNDECIDED}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, errors.SpecError):
        return EXIT_PARSE
    if isinstance(exc, errors.DegenerateMetric):
        return EXIT_DEGENERATE_METRIC
    if isinstance(exc, (errors.BadOptions, errors.InsufficientTail)):
        return EXIT_INTEGRATOR
    return EXIT_INVARIANT


def default_seed() -> int:
    env = os.environ.get("GEOCOMPLETE_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise errors.SpecError(f"GEOCOMPLETE_SEED must be an integer, got {env!r}") from None


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{x:.12g}" for x in v) + ")"


def _parse_x0(text: str, seed: int) -> np.ndarray:
    if text.strip().lower() in ("random", "random-unit", "random unit"):
        return random_unit_starts(1, seed)[0]
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise errors.SpecError(f"--x0 must be three comma-separated reals or 'random', got {text!r}") from None
    if len(vals) != 3:
        raise errors.SpecError(f"--x0 needs 3 components, got {len(vals)}")
    return np.array(vals)


def _write(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


# ----------------------------------------------------------------------------
# commands


def cmd_classify(args) -> int:
    spec = load_spec(args.spec)
    cls = classify(spec.algebra)
    print(cls.describe())
    if cls.milnor is not None:
        print(f"milnor alphas: {_fmt_vec(cls.milnor.alphas)}  residual {cls.milnor.residual:.3e} (tol 1e-9)")
    else:
        print(f"trace vector: {_fmt_vec(cls.trace_vector)} (unimodular tol 1e-10)")
    return EXIT_OK


def cmd_analyze(args) -> int:
    spec = load_spec(args.spec)
    report, verdict = analyze(spec, integrate_evidence=not args.no_integrate, seed=args.seed,
                              rtol=args.rtol, atol=args.atol)
    if args.json:
        _write(dumps(report), args.json)
    if args.json != "-":
        print(f"{spec.name}: {report['classification']['description']}")
        print(f"field ({verdict.field_kind}):")
        print(verdict.field.pretty())
        print(f"idempotents: {len(report['idempotents'])}")
        print(f"first integrals: {len(report['first_integrals']['basis'])}")
        cert = report["verdict"]["certificate"]
        extra = f" case ({cert['case']})" if cert.get("case") else ""
        print(f"verdict: {verdict.label} via {cert['type']}{extra}")
        if verdict.witness is not None:
            print(f"witness: {_fmt_vec(verdict.witness)}")
        if "integration" in report:
            print(f"integration: {report['integration']['conclusion']}")
        print(f"outcome: {report['outcome']}")
    return STATUS_EXIT[verdict.status]


def cmd_integrate(args) -> int:
    spec = load_spec(args.spec)
    F, kind, energy = select_field(spec, args.field)
    x0 = _parse_x0(args.x0, args.seed)
    opts = IntegrateOptions(
        rtol=args.rtol if args.rtol is not None else float(spec.option("rtol")),
        atol=args.atol if args.atol is not None else float(spec.option("atol")),
        norm_cap=float(spec.option("norm_cap")),
        h_min=float(spec.option("h_min")),
    )
    T = args.t_max if args.t_max is not None else float(spec.option("t_max"))
    traj = integrate(F, x0, T, opts, backward=args.backward, monitor={"energy": energy})
    if args.out:
        write_csv(traj, args.out, energy)
    print(f"field: {kind}  x0: {_fmt_vec(x0)}  direction: {'backward' if args.backward else 'forward'}")
    print(f"status: {traj.status.describe()}")
    print(f"steps: {len(traj.times) - 1}  energy drift: {traj.drift_report['energy']:.3e} (rtol {opts.rtol:g}, atol {opts.atol:g})")
    return EXIT_OK


def cmd_first_integrals(args) -> int:
    spec = load_spec(args.spec)
    F, kind, _ = select_field(spec, args.field)
    fib = quadratic_first_integrals(F)
    doc = {"field": kind, "svd_tol": 1e-10, "residual_tol": 1e-10,
           "basis": [form_terms(B) for B in fib.basis], "residuals": fib.residuals}
    if args.json:
        _write(dumps(doc), args.json)
    else:
        print(f"field: {kind}; {len(fib)} quadratic first integral(s)")
        for B, r in zip(fib.basis, fib.residuals):
            print("  " + " + ".join(f"{v:.12g}*{m}" for m, v in form_terms(B).items()) + f"   (residual {r:.1e})")
    return EXIT_OK


def cmd_idempotents(args) -> int:
    spec = load_spec(args.spec)
    F, kind, _ = select_field(spec, args.field)
    dirs = invariant_directions(F)
    idem = find_idempotents(F, dirs)
    doc = {"field": kind,
           "directions": [{"d": d.d, "rho": d.rho, "kind": d.kind, "flagged": d.flagged} for d in dirs],
           "idempotents": [{"X": X, "residual": idempotent_residual(F, X)} for X in idem]}
    if args.json:
        _write(dumps(doc), args.json)
    else:
        print(f"field: {kind}; {len(dirs)} invariant direction(s), {len(idem)} idempotent(s)")
        for d in dirs:
            flag = " (flagged)" if d.flagged else ""
            print(f"  {d.kind:14s} d={_fmt_vec(d.d)} rho={d.rho:.6g}{flag}")
        for X in idem:
            print(f"  idempotent X*={_fmt_vec(X)} residual={idempotent_residual(F, X):.1e}")
    return EXIT_OK


def _analyze_file(path, seed, rtol, atol):
    name = os.path.basename(path)
    try:
        report, verdict = analyze(load_spec(path), seed=seed, rtol=rtol, atol=atol)
        return {"file": name, "name": report["name"], "status": verdict.status.value, "label": verdict.label,
                "outcome": report["outcome"], "exit_code": STATUS_EXIT[verdict.status], "error": None}
    except errors.GeoCompleteError as exc:
        return {"file": name, "name": None, "status": None, "label": None, "outcome": "Error",
                "exit_code": exit_code_for(exc), "error": f"{type(exc).__name__}: {exc}"}


def cmd_batch(args) -> int:
    if not os.path.isdir(args.dir):
        raise errors.SpecError(f"not a directory: {args.dir}")
    files = sorted(f for f in os.listdir(args.dir) if f.endswith(".json"))
    paths = [os.path.join(args.dir, f) for f in files]
    n = max(1, int(args.parallel))
    if n == 1 or len(paths) <= 1:
        results = [_analyze_file(p, args.seed, args.rtol, args.atol) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=n) as ex:
            results = list(ex.map(_analyze_file, paths, [args.seed] * len(paths),
                                  [args.rtol] * len(paths), [args.atol] * len(paths)))
    summary = {"directory": os.path.basename(os.path.normpath(args.dir)), "count": len(results), "results": results}
    if args.summary:
        _write(dumps(summary), args.summary)
    for r in results:
        line = r["outcome"] if r["error"] is None else f"ERROR {r['error']}"
        print(f"{r['file']}: {line}")
    return EXIT_BATCH_FAILURE if any(r["error"] for r in results) else EXIT_OK


def cmd_preset(args) -> int:
    if args.action == "list":
        for name in PRESETS:
            print(name)
        return EXIT_OK
    if args.action == "show":
        if args.name not in PRESETS:
            raise errors.SpecError(f"unknown preset {args.name!r}")
        sys.stdout.write(dumps(PRESETS[args.name]))
        return EXIT_OK
    # export
    os.makedirs(args.name, exist_ok=True)
    names = args.only or [n for n in PRESETS if n.startswith("example")]
    for n in names:
        if n not in PRESETS:
            raise errors.SpecError(f"unknown preset {n!r}")
        with open(os.path.join(args.name, f"{n}.json"), "w", newline="\n") as fh:
            fh.write(dumps(PRESETS[n]))
    print(f"wrote {len(names)} spec file(s) to {args.name}")
    return EXIT_OK


# ----------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _globals(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--rtol", type=float, default=d, help="integrator relative tolerance")
    p.add_argument("--atol", type=float, default=d, help="integrator absolute tolerance")
    p.add_argument("--seed", type=int, default=d, help="seed for randomized starts and searches (default $GEOCOMPLETE_SEED or 0)")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="geocomplete", description="Geodesic completeness of left-invariant metrics on 3-dimensional Lie groups.")
    _globals(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        _globals(sp, suppress=True)
        sp.set_defaults(func=func)
        return sp

    sp = add("classify", cmd_classify, "classify the Lie algebra of a spec")
    sp.add_argument("spec", help="spec file or preset name")

    sp = add("analyze", cmd_analyze, "full completeness analysis")
    sp.add_argument("spec", help="spec file or preset name")
    sp.add_argument("--json", metavar="OUT", help="write the JSON report to OUT ('-' for stdout)")
    sp.add_argument("--no-integrate", action="store_true", help="skip numerical corroboration")

    sp = add("integrate", cmd_integrate, "integrate the geodesic field from one start")
    sp.add_argument("spec", help="spec file or preset name")
    sp.add_argument("--x0", required=True, help="start 'a,b,c' or 'random' (seeded unit vector)")
    sp.add_argument("--t-max", type=float, default=None, help="horizon (default from spec options)")
    sp.add_argument("--out", help="CSV trajectory output")
    sp.add_argument("--backward", action="store_true", help="integrate in negative time")
    sp.add_argument("--field", choices=FIELD_KINDS, default="auto")

    for name, func, help_ in (("first-integrals", cmd_first_integrals, "quadratic first integrals of the field"),
                              ("idempotents", cmd_idempotents, "invariant directions and idempotents")):
        sp = add(name, func, help_)
        sp.add_argument("spec", help="spec file or preset name")
        sp.add_argument("--field", choices=FIELD_KINDS, default="auto")
        sp.add_argument("--json", metavar="OUT", help="write JSON to OUT ('-' for stdout)")

    sp = add("batch", cmd_batch, "analyze every *.json spec in a directory")
    sp.add_argument("dir")
    sp.add_argument("--parallel", type=int, default=1, help="worker processes")
    sp.add_argument("--summary", metavar="OUT", help="write the JSON summary to OUT")

    sp = add("preset", cmd_preset, "list, show or export presets")
    sp.add_argument("action", choices=("list", "show", "export"))
    sp.add_argument("name", nargs="?", help="preset name (show) or output directory (export)")
    sp.add_argument("--only", nargs="*", help="presets to export (default: the five examples)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.seed is None:
            args.seed = default_seed()
        if args.command == "preset" and args.action in ("show", "export") and not args.name:
            raise errors.SpecError(f"preset {args.action} needs a name")
        return args.func(args)
    except errors.GeoCompleteError as exc:
        print(f"geocomplete: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
