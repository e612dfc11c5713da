"""Command-line interface.

Subcommands: evaluate, threshold, sweep, reproduce, validate-formulas.
Sweep output uses the frozen CSV schema

    two_j,lambda,gamma,k_lgi,lgi_violation,k_wlgi,k_nsit

with LF line endings and floats at 17 significant digits; rounding is
the consumer's job.  Exit codes: 0 success, 2 invalid parameters,
3 internal numerical-consistency failure, 4 formula mismatch under
``validate-formulas --strict``.  Output is byte-identical across runs
for identical arguments.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys as _sys
from dataclasses import asdict, dataclass

import numpy as np

from . import analysis, formulas
from .povm import InvalidMeasurementParams, MeasurementParams, validate_params
from .protocol import NumericalConsistencyError, ProtocolSpec, evaluate_mr
from .spin import SpinSystem

SWEEP_CSV_HEADER = "two_j,lambda,gamma,k_lgi,lgi_violation,k_wlgi,k_nsit"

EXIT_OK = 0
EXIT_INVALID_PARAMS = 2
EXIT_NUMERICAL = 3
EXIT_FORMULA_MISMATCH = 4


def _fmt(value: float) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return f"{value:.17g}"


def _parse_grid(text: str) -> list[float]:
    """Grid spec: 'start:stop:count' (inclusive linspace) or 'a,b,c' or 'a'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(
                f"grid spec {text!r} must be start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 0:
            raise argparse.ArgumentTypeError("grid count must be >= 0")
        return [float(v) for v in np.linspace(start, stop, count)]
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


@dataclass(frozen=True)
class RunConfig:
    """Canonical form of one parsed invocation; round-trip stable."""

    subcommand: str
    two_j: int | None
    sharpness: float | None
    bias: float | None
    condition: str | None
    bias_grid: tuple[float, ...] | None
    table: str | None
    out_format: str
    out_path: str | None
    threads: int | None
    strict: bool
    tol: float

    def canonical_dict(self) -> dict:
        return asdict(self)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinmr",
        description="Quantum violations of macrorealism (LGI, WLGI, NSIT) for a "
                    "precessing spin-j system under biased unsharp measurements.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_spin(p: argparse.ArgumentParser) -> None:
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--two-j", type=_positive_int, dest="two_j",
                           help="twice the spin quantum number (integer >= 1)")
        group.add_argument("--j", type=_positive_int, dest="j_integer",
                           help="spin quantum number; integer values only")

    def add_output(p: argparse.ArgumentParser, default_format: str) -> None:
        p.add_argument("--format", choices=("csv", "json", "text"),
                       default=default_format, help="output format")
        p.add_argument("--out", "-o", default=None,
                       help="output path (default: standard output)")

    p_eval = sub.add_parser("evaluate", help="evaluate the three functionals at one point")
    add_spin(p_eval)
    p_eval.add_argument("--lambda", type=float, required=True, dest="sharpness",
                        help="sharpness parameter")
    p_eval.add_argument("--gamma", type=float, default=0.0, dest="bias",
                        help="biasedness parameter (default 0)")
    add_output(p_eval, "text")

    p_thr = sub.add_parser("threshold", help="threshold sharpness for one condition")
    add_spin(p_thr)
    p_thr.add_argument("--gamma", type=float, default=0.0, dest="bias")
    p_thr.add_argument("--condition", required=True,
                       choices=analysis.CONDITIONS + ("all",))
    p_thr.add_argument("--tol", type=float, default=analysis.DEFAULT_LAMBDA_TOL,
                       help="sharpness resolution of the bisection")
    add_output(p_thr, "text")

    p_sweep = sub.add_parser("sweep", help="sweep the bias at fixed sharpness")
    add_spin(p_sweep)
    p_sweep.add_argument("--lambda", type=float, required=True, dest="sharpness")
    p_sweep.add_argument("--gamma-grid", type=_parse_grid, required=True, dest="bias_grid",
                         help="gamma grid: start:stop:count or comma-separated values")
    p_sweep.add_argument("--threads", type=_positive_int, default=None,
                         help="max parallel workers (default: machine-sized)")
    add_output(p_sweep, "csv")

    p_rep = sub.add_parser("reproduce", help="re-run the reference-table grids")
    p_rep.add_argument("--table", choices=("1", "2", "3", "all"), default="all")
    add_output(p_rep, "text")

    p_val = sub.add_parser("validate-formulas",
                           help="cross-validate the closed-form expressions "
                                "against the simulator")
    p_val.add_argument("--strict", action="store_true",
                       help="exit with status 4 if any comparison point mismatches")
    add_output(p_val, "text")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    two_j = getattr(args, "two_j", None)
    if two_j is None and getattr(args, "j_integer", None) is not None:
        two_j = 2 * args.j_integer
    bias_grid = getattr(args, "bias_grid", None)
    return RunConfig(
        subcommand=args.subcommand,
        two_j=two_j,
        sharpness=getattr(args, "sharpness", None),
        bias=getattr(args, "bias", None),
        condition=getattr(args, "condition", None),
        bias_grid=tuple(bias_grid) if bias_grid is not None else None,
        table=getattr(args, "table", None),
        out_format=args.format,
        out_path=args.out,
        threads=getattr(args, "threads", None),
        strict=getattr(args, "strict", False),
        tol=getattr(args, "tol", analysis.DEFAULT_LAMBDA_TOL),
    )


def _checked_system(config: RunConfig) -> tuple[SpinSystem, MeasurementParams]:
    sys_ = SpinSystem(config.two_j)
    params = MeasurementParams(config.sharpness or 0.0, config.bias or 0.0)
    validity = validate_params(sys_, params)
    if not validity.valid:
        raise InvalidMeasurementParams(validity.binding_constraint)
    return sys_, params


def _sweep_csv(rows: list[analysis.SweepRow]) -> str:
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        lines.append(",".join(_fmt(v) for v in (
            r.two_j, r.sharpness, r.bias, r.k_lgi, r.lgi_violation, r.k_wlgi, r.k_nsit)))
    return "\n".join(lines) + "\n"


def _sweep_json(rows: list[analysis.SweepRow]) -> str:
    payload = [{"two_j": r.two_j, "lambda": r.sharpness, "gamma": r.bias,
                "k_lgi": r.k_lgi, "lgi_violation": r.lgi_violation,
                "k_wlgi": r.k_wlgi, "k_nsit": r.k_nsit} for r in rows]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _cmd_evaluate(config: RunConfig) -> tuple[str, int]:
    sys_, params = _checked_system(config)
    scores = evaluate_mr(ProtocolSpec(sys_, params))
    row = analysis.SweepRow(sys_.two_j, params.sharpness, params.bias, scores.k_lgi,
                            scores.lgi_violation, scores.k_wlgi, scores.k_nsit)
    if config.out_format == "csv":
        return _sweep_csv([row]), EXIT_OK
    if config.out_format == "json":
        return _sweep_json([row]), EXIT_OK
    lines = [f"two_j = {sys_.two_j}",
             f"lambda = {_fmt(params.sharpness)}",
             f"gamma = {_fmt(params.bias)}",
             f"k_lgi = {_fmt(scores.k_lgi)}",
             f"lgi_violation = {_fmt(scores.lgi_violation)}",
             f"k_wlgi = {_fmt(scores.k_wlgi)}",
             f"k_nsit = {_fmt(scores.k_nsit)}"]
    return "\n".join(lines) + "\n", EXIT_OK


def _threshold_payload(result: analysis.ThresholdResult) -> dict:
    return {
        "condition": result.condition,
        "two_j": result.two_j,
        "gamma": result.bias,
        "lambda_th": result.lambda_th,
        "persists_to_zero": result.persists_to_zero,
        "status": "no-violation" if result.no_violation else "ok",
        "bracket": list(result.bracket) if result.bracket else None,
        "iterations": result.iterations,
    }


def _cmd_threshold(config: RunConfig) -> tuple[str, int]:
    sys_ = SpinSystem(config.two_j)
    conditions = analysis.CONDITIONS if config.condition == "all" else (config.condition,)
    results = [analysis.find_threshold(sys_, config.bias or 0.0, c, tol=config.tol)
               for c in conditions]
    if config.out_format == "json":
        return json.dumps([_threshold_payload(r) for r in results],
                          indent=2, sort_keys=True) + "\n", EXIT_OK
    if config.out_format == "csv":
        lines = ["condition,two_j,gamma,lambda_th,persists_to_zero,status"]
        for r in results:
            status = "no-violation" if r.no_violation else "ok"
            lam = "" if r.no_violation else _fmt(r.lambda_th)
            lines.append(f"{r.condition},{r.two_j},{_fmt(r.bias)},{lam},"
                         f"{str(r.persists_to_zero).lower()},{status}")
        return "\n".join(lines) + "\n", EXIT_OK
    lines = []
    for r in results:
        if r.no_violation:
            lines.append(f"{r.condition}: no violation anywhere on the sharpness range")
        elif r.persists_to_zero:
            lines.append(f"{r.condition}: lambda_th = 0 (violation persists to zero sharpness)")
        else:
            lines.append(f"{r.condition}: lambda_th = {_fmt(r.lambda_th)} "
                         f"(bracket [{_fmt(r.bracket[0])}, {_fmt(r.bracket[1])}], "
                         f"{r.iterations} bisection steps)")
    return "\n".join(lines) + "\n", EXIT_OK


def _cmd_sweep(config: RunConfig) -> tuple[str, int]:
    sys_ = SpinSystem(config.two_j)
    workers = config.threads if config.threads is not None else (os.cpu_count() or 1)
    rows = analysis.sweep_gamma(sys_, config.sharpness, list(config.bias_grid),
                                max_workers=workers)
    if config.out_format == "json":
        return _sweep_json(rows), EXIT_OK
    if config.out_format == "text":
        header = f"{'gamma':>22} {'k_lgi':>22} {'lgi_violation':>22} {'k_wlgi':>22} {'k_nsit':>22}"
        body = [f"{_fmt(r.bias):>22} {_fmt(r.k_lgi):>22} {_fmt(r.lgi_violation):>22} "
                f"{_fmt(r.k_wlgi):>22} {_fmt(r.k_nsit):>22}" for r in rows]
        return "\n".join([header] + body) + "\n", EXIT_OK
    return _sweep_csv(rows), EXIT_OK


def _reproduce_cell_row(cell: analysis.CellComparison) -> str:
    exact = "" if cell.computed_exact_bias is None else _fmt(cell.computed_exact_bias)
    return (f"{cell.table},{cell.two_j},{_fmt(cell.bias)},{cell.quantity},"
            f"{_fmt(cell.computed)},{exact},{_fmt(cell.reference)},"
            f"{_fmt(cell.deviation)},{str(cell.within_tol).lower()}")


def _cmd_reproduce(config: RunConfig) -> tuple[str, int]:
    tables = (1, 2, 3) if config.table == "all" else (int(config.table),)
    reports = analysis.reproduce_tables(tables)
    if config.out_format == "json":
        payload = [{"table": rep.table,
                    "all_within_tol": rep.all_within_tol,
                    "cells": [asdict(c) for c in rep.cells]} for rep in reports]
        return json.dumps(payload, indent=2, sort_keys=True) + "\n", EXIT_OK
    if config.out_format == "csv":
        lines = ["table,two_j,gamma,quantity,computed,computed_exact_gamma,"
                 "reference,deviation,within_tol"]
        for rep in reports:
            lines.extend(_reproduce_cell_row(c) for c in rep.cells)
        return "\n".join(lines) + "\n", EXIT_OK
    lines = []
    for rep in reports:
        lines.append(f"table {rep.table}:")
        for c in rep.cells:
            mark = "ok " if c.within_tol else "OUT"
            exact = ("" if c.computed_exact_bias is None
                     else f"  (exact-fraction gamma: {c.computed_exact_bias:.6f})")
            lines.append(f"  [{mark}] two_j={c.two_j:<3d} gamma={c.bias:<6g} "
                         f"{c.quantity:<14s} computed={c.computed:.6f} "
                         f"reference={c.reference:.4f} deviation={c.deviation:+.2e}{exact}")
        bad = rep.out_of_tolerance()
        if bad:
            lines.append(f"  WARNING: {len(bad)} cell(s) outside tolerance "
                         f"{bad[0].tolerance:g}; see README for the documented "
                         "reference-value discrepancies")
        else:
            lines.append("  all cells within tolerance")
    return "\n".join(lines) + "\n", EXIT_OK


def _cmd_validate_formulas(config: RunConfig) -> tuple[str, int]:
    reports = formulas.cross_validate()
    fractions = formulas.match_fractions(reports)
    mismatches = [r for r in reports if not r.matches]
    code = EXIT_FORMULA_MISMATCH if (config.strict and mismatches) else EXIT_OK
    if config.out_format == "json":
        payload = {"reading": formulas.K_LGI_READING,
                   "tolerance": formulas.CROSS_VALIDATION_TOL,
                   "match_fractions": fractions,
                   "points": [asdict(r) for r in reports]}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n", code
    if config.out_format == "csv":
        lines = ["formula,two_j,lambda,gamma,closed_form,simulator,discrepancy,matches"]
        for r in reports:
            lines.append(f"{r.formula},{r.two_j},{_fmt(r.sharpness)},{_fmt(r.bias)},"
                         f"{_fmt(r.closed_form_value)},{_fmt(r.simulator_value)},"
                         f"{_fmt(r.discrepancy)},{str(r.matches).lower()}")
        return "\n".join(lines) + "\n", code
    lines = [f"bracket reading: {formulas.K_LGI_READING}",
             f"tolerance: {formulas.CROSS_VALIDATION_TOL:g}"]
    for formula, fraction in fractions.items():
        lines.append(f"{formula}: {fraction:.0%} of points match")
    lines.append("the closed forms drop terms of order lambda*4^(-j); mismatches "
                 "concentrate at small spin, as expected")
    for r in mismatches:
        lines.append(f"  MISMATCH {r.formula} two_j={r.two_j} lambda={r.sharpness:.4f} "
                     f"gamma={r.bias:.4f}: closed={r.closed_form_value:.9f} "
                     f"simulator={r.simulator_value:.9f} diff={r.discrepancy:.2e}")
    return "\n".join(lines) + "\n", code


_COMMANDS = {
    "evaluate": _cmd_evaluate,
    "threshold": _cmd_threshold,
    "sweep": _cmd_sweep,
    "reproduce": _cmd_reproduce,
    "validate-formulas": _cmd_validate_formulas,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _config_from_args(args)
    try:
        output, code = _COMMANDS[config.subcommand](config)
    except InvalidMeasurementParams as exc:
        print(f"error: invalid-params: {exc}", file=_sys.stderr)
        return EXIT_INVALID_PARAMS
    except (NumericalConsistencyError, analysis.ThresholdBracketError) as exc:
        print(f"error: numerical-consistency: {exc}", file=_sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: invalid-params: {exc}", file=_sys.stderr)
        return EXIT_INVALID_PARAMS
    if config.out_path is None:
        _sys.stdout.write(output)
    else:
        with open(config.out_path, "w", newline="\n") as handle:
            handle.write(output)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
