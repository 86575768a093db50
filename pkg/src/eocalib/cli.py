"""Command-line surface: ``evaluate``, ``simulate``, and ``km``.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import cohort_io
from .calibration import METHODS, evaluate, evaluate_grouped
from .errors import EOCalibError, ValidationError
from .risk_models import RCMCoefficients, RosnerColditzModel, UniformModel
from .simulation import (
    GRID_N,
    GRID_REPLICATES,
    PAPER_GRID_SEED,
    design_for_rate,
    run_design,
    run_paper_grid,
)
from .survival import kaplan_meier


def _parse_model(text: str):
    kind, _, arg = text.partition(":")
    if kind == "uniform":
        if not arg:
            raise ValidationError("uniform model needs a support bound, e.g. uniform:100")
        return UniformModel(float(arg)), False
    if kind == "rcm":
        coef = RCMCoefficients.from_file(arg) if arg else RCMCoefficients()
        return RosnerColditzModel(coef), True
    raise ValidationError(f"unknown model {text!r}; use uniform:<lambda> or rcm[:<coef-file>]")


def _parse_methods(text):
    if text is None:
        return None
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValidationError(f"unknown methods: {unknown}")
    return methods


def _write_output(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_evaluate(args) -> int:
    model, with_covariates = _parse_model(args.model)
    cohort = cohort_io.read_cohort_csv(args.cohort, args.t0, with_covariates)
    methods = _parse_methods(args.methods)
    if args.groups is not None:
        if args.groups != "deciles":
            raise ValidationError(f"unsupported grouping {args.groups!r}; use 'deciles'")
        report = evaluate_grouped(
            cohort, model, methods=methods if methods is not None else ("m0", "m3")
        )
        text = (
            cohort_io.grouped_report_to_csv(report)
            if args.format == "csv"
            else cohort_io.grouped_report_to_json(report)
        )
    else:
        report = evaluate(cohort, model, methods=methods if methods is not None else METHODS)
        text = (
            cohort_io.report_to_csv(report)
            if args.format == "csv"
            else cohort_io.report_to_json(report)
        )
    _write_output(text, args.out)
    return 0


def _cmd_simulate(args) -> int:
    if args.paper_grid == (args.grid is not None):
        raise ValidationError("pass exactly one of --paper-grid or --grid FILE")
    if args.paper_grid:
        summaries = run_paper_grid(
            seed=args.seed, n=args.n, replicates=args.replicates, jobs=args.jobs
        )
    else:
        summaries = []
        for lam, rate, n, t0, replicates, seed in cohort_io.parse_grid_file(args.grid):
            design = design_for_rate(lam, rate, n, t0, replicates, seed)
            summaries.append(run_design(design, target_uks_rate=rate, jobs=args.jobs))
    _write_output(cohort_io.summaries_to_csv(summaries), args.out)
    return 0


def _cmd_km(args) -> int:
    cohort = cohort_io.read_cohort_csv(args.cohort, args.t0)
    km = kaplan_meier(cohort)
    se = math.sqrt(km.greenwood_var) if not km.degenerate else float("nan")
    lines = (
        f"incidence {km.incidence:.4f}\n"
        f"survival {km.survival:.4f}\n"
        f"greenwood_se {se:.4f}\n"
    )
    _write_output(lines, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eocalib",
        description="Expected/observed calibration of risk prediction tools "
        "on right-censored cohorts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="calibration report for a cohort CSV")
    p_eval.add_argument("cohort", help="cohort CSV with columns z,delta[,covariates]")
    p_eval.add_argument("--t0", type=float, required=True, help="horizon in years")
    p_eval.add_argument(
        "--model", required=True, help="uniform:<lambda> or rcm[:<coef-file>]"
    )
    p_eval.add_argument("--methods", help="comma list among m0,m1,m2,m3 (default all)")
    p_eval.add_argument("--groups", help="'deciles' for risk-adjusted m0/m3 reports")
    p_eval.add_argument("--out", help="output path (default stdout)")
    p_eval.add_argument("--format", choices=("csv", "json"), default="json")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo design grid summaries")
    p_sim.add_argument("--paper-grid", action="store_true", help="run the built-in 12-design grid")
    p_sim.add_argument("--grid", help="CSV of designs: lambda,target_rate,n,t0,replicates,seed")
    p_sim.add_argument("--seed", type=int, default=PAPER_GRID_SEED)
    p_sim.add_argument("--n", type=int, default=GRID_N, help="cohort size (built-in grid)")
    p_sim.add_argument(
        "--replicates", type=int, default=GRID_REPLICATES, help="replicates (built-in grid)"
    )
    p_sim.add_argument("--jobs", type=int, default=1, help="worker processes")
    p_sim.add_argument("--out", help="output path (default stdout)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_km = sub.add_parser("km", help="Kaplan-Meier incidence at a horizon")
    p_km.add_argument("cohort", help="cohort CSV with columns z,delta")
    p_km.add_argument("--t0", type=float, required=True, help="horizon in years")
    p_km.add_argument("--out", help="output path (default stdout)")
    p_km.set_defaults(func=_cmd_km)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EOCalibError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
