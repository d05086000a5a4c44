"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 runtime error. Errors go to
stderr as ``spherical-qmc: error[validation]: ...`` or
``spherical-qmc: error[runtime]: ...``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

PROG = "spherical-qmc"
HELP_WIDTH = 100


class ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{message}\n{self.format_usage().rstrip()}")


def _formatter(prog):
    return argparse.HelpFormatter(prog, width=HELP_WIDTH)


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    from .samplers import KINDS
    from .scoring import METRICS

    common = _Parser(add_help=False, formatter_class=_formatter)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=_seed, default=None, help="64-bit base seed (default 0, or the plan's seed)")
    g.add_argument("--threads", type=_positive_int, default=1, help="maximum parallelism (default 1)")
    g.add_argument("--out", default=None, help="output path (directory for sample/experiment, file for report TSV)")

    p = _Parser(prog=PROG, formatter_class=_formatter,
                description="Spherical ensemble sampling, worst-case errors and explicit QMC bounds.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("sample", parents=[common], formatter_class=_formatter,
                       help="draw configurations", description="Draw configurations; writes one CSV per replica and manifest.json to --out.")
    s.add_argument("--kind", required=True, choices=KINDS, help="sampler")
    s.add_argument("--n", required=True, type=_positive_int, help="number of points")
    s.add_argument("--replicas", type=_positive_int, default=1, help="number of replicas (default 1)")

    s = sub.add_parser("score", parents=[common], formatter_class=_formatter,
                       help="evaluate a metric", description="Evaluate one metric on a configuration CSV and print a JSON record.")
    s.add_argument("--in", dest="infile", required=True, help="configuration CSV with header x,y,z")
    s.add_argument("--metric", required=True, choices=METRICS, help="metric")
    s.add_argument("--s", type=float, default=None, help="smoothness s (wce, wce-heat: default 2; gensum: required)")
    s.add_argument("--t", type=float, default=None, help="heat time t (gt only)")
    s.add_argument("--tol", type=_positive_float, default=1e-8, help="absolute tolerance on wce^2 or g(t) (default 1e-8)")
    s.add_argument("--tail", choices=("uniform", "bernstein"), default="uniform", help="wce tail bound (default uniform)")
    s.add_argument("--mode", choices=("exact-smallN", "randomized"), default="exact-smallN", help="capLinf mode")
    s.add_argument("--mc-caps", type=_positive_int, default=10_000, help="capL2 Monte Carlo caps (default 10000)")

    s = sub.add_parser("bounds", parents=[common], formatter_class=_formatter,
                       help="evaluate explicit bounds", description="Print a JSON bound report: either --eta, or --eps with --delta.")
    s.add_argument("--n", required=True, type=_positive_int, help="number of points N")
    s.add_argument("--eta", type=_positive_float, default=None, help="confidence parameter eta (8 pi R^2 = 1 + eta)")
    s.add_argument("--eps", type=_positive_float, default=None, help="smoothness excess eps (norm H^-(2+eps))")
    s.add_argument("--delta", type=_positive_float, default=None, help="deviation threshold delta")
    s.add_argument("--c0", type=_positive_float, default=2.0, help="zeta constant C0 (default 2)")

    s = sub.add_parser("experiment", parents=[common], formatter_class=_formatter,
                       help="run an experiment plan", description="Run a JSON experiment plan; writes records.csv and summary.json.")
    s.add_argument("--plan", required=True, help="plan JSON (schema version 1)")

    s = sub.add_parser("report", parents=[common], formatter_class=_formatter,
                       help="summarize records", description="Print a summary table of records.csv; --out writes plot-ready TSV.")
    s.add_argument("--in", dest="infile", required=True, help="records CSV written by experiment")
    s.add_argument("--metric", default="wce", help="metric for the TSV (default wce)")
    s.add_argument("--s", type=float, default=2.0, help="metric parameter for the TSV (default 2)")
    s.add_argument("--eta", type=_positive_float, default=3.0, help="eta for the bound column (default 3)")
    return p


def _set_threads(k: int) -> None:
    import numba

    numba.set_num_threads(min(k, numba.config.NUMBA_NUM_THREADS))


def _validate(args):
    """Checks beyond argparse; returns a zero-argument callable that does the work."""
    from .scoring import MetricSpec

    if args.command == "sample":
        if args.out is None:
            raise ValidationError("sample needs --out DIR")
        return lambda: _cmd_sample(args)
    if args.command == "score":
        if not Path(args.infile).is_file():
            raise ValidationError(f"no such file: {args.infile}")
        if args.metric == "gt":
            if args.s is not None:
                raise ValidationError("gt takes --t, not --s")
            param = args.t
        else:
            if args.t is not None:
                raise ValidationError("--t applies to gt only")
            param = args.s
        opts = {}
        if args.metric == "capLinf":
            opts["mode"] = args.mode
        if args.metric == "capL2":
            opts["mc_caps"] = args.mc_caps
        if args.metric == "wce":
            opts["tail"] = args.tail
        try:
            spec = MetricSpec(args.metric, param if args.metric != "wce-dist" else None, args.tol, opts)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        return lambda: _cmd_score(args, spec)
    if args.command == "bounds":
        if args.eta is not None and (args.eps is not None or args.delta is not None):
            raise ValidationError("give either --eta or --eps with --delta, not both")
        if args.eta is None and (args.eps is None or args.delta is None):
            raise ValidationError("bounds needs --eta, or both --eps and --delta")
        return lambda: _cmd_bounds(args)
    if args.command == "experiment":
        from .experiments import ExperimentPlan

        try:
            plan = ExperimentPlan.load(args.plan)
        except FileNotFoundError:
            raise ValidationError(f"no such file: {args.plan}") from None
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        out = args.out or plan.output_dir
        if out is None:
            raise ValidationError("experiment needs --out DIR or output_dir in the plan")
        return lambda: _cmd_experiment(args, plan, Path(out))
    if args.command == "report":
        if not Path(args.infile).is_file():
            raise ValidationError(f"no such file: {args.infile}")
        return lambda: _cmd_report(args)
    raise ValidationError(f"unknown command {args.command}")


def _cmd_sample(args):
    from .samplers import SamplerSpec, sample
    from .sphere import RngStream

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed or 0
    files = []
    for r in range(args.replicas):
        c = sample(SamplerSpec(args.kind, args.n, RngStream(seed, r)))
        name = f"replica_{r:05d}.csv"
        c.to_csv(out / name)
        files.append(name)
    manifest = {"kind": args.kind, "n": args.n, "seed": seed,
                "stream_ids": list(range(args.replicas)), "files": files}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(json.dumps({"out": str(out), "replicas": args.replicas}))


def _cmd_score(args, spec):
    import numpy as np

    from .scoring import score
    from .sphere import Configuration

    try:
        c = Configuration.from_csv(args.infile)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    gen = np.random.default_rng(np.random.SeedSequence(args.seed or 0))
    print(json.dumps(score(c, spec, gen).to_dict()))


def _cmd_bounds(args):
    from .spectral import DomainError, concentration_report, confidence_report

    try:
        if args.eta is not None:
            rep = confidence_report(args.n, args.eta)
        else:
            rep = concentration_report(args.n, args.eps, args.delta, args.c0)
    except DomainError as exc:
        raise ValidationError(str(exc)) from None
    print(json.dumps(rep.to_dict(), indent=2))


def _cmd_experiment(args, plan, out: Path):
    from dataclasses import replace

    from .experiments import run_batch, summarize
    from .experiments.persist import rows_from_record

    if args.seed is not None:
        plan = replace(plan, seed=args.seed)
    out.mkdir(parents=True, exist_ok=True)
    (out / "plan.json").write_text(json.dumps(plan.to_dict(), indent=2) + "\n")
    records = run_batch(plan, threads=args.threads, out=out / "records.csv")
    rows = [r for rec in records for r in rows_from_record(rec)]
    summary = {"plan": plan.to_dict(), "cells": [c.to_dict() for c in summarize(rows)],
               "failed_replicas": [{"n": r.n, "stream_id": r.stream_id, "error": r.error}
                                   for r in records if r.error]}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps({"out": str(out), "records": len(records),
                      "failed": len(summary["failed_replicas"])}))


def _cmd_report(args):
    from .experiments import load, text_table, tsv

    try:
        rows = load(args.infile)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    sys.stdout.write(text_table(rows))
    if args.out:
        Path(args.out).write_text(tsv(rows, args.metric, args.s, args.eta))


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        work = _validate(args)
    except ValidationError as exc:
        print(f"{PROG}: error[validation]: {exc}", file=sys.stderr)
        return 1
    try:
        _set_threads(args.threads)
        work()
    except ValidationError as exc:
        print(f"{PROG}: error[validation]: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"{PROG}: error[runtime]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
