"""Threshold-sharpness search, parameter sweeps and reference-table checks.

The threshold for a macrorealism condition at fixed (spin, bias) is the
sharpness below which its quantum violation disappears.  Violations are
separated from numerical zero by VIOLATION_EPS; the search pre-scans a
64-point sharpness grid, demands a single predicate change, and bisects
it to the requested resolution.

When the violation predicate holds at every pre-scan point down to the
bottom of the grid the violation is reported as persisting to zero
sharpness (the NSIT violation scales like sharpness^2..3 near zero, so
the predicate cannot be probed meaningfully below the grid floor).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .povm import InvalidMeasurementParams, MeasurementParams, validate_params
from .protocol import MrScores, ProtocolSpec, evaluate_mr
from .spin import SpinSystem

__all__ = [
    "CONDITIONS",
    "VIOLATION_EPS",
    "DEFAULT_LAMBDA_TOL",
    "ThresholdResult",
    "ThresholdBracketError",
    "SweepRow",
    "CellComparison",
    "TableReport",
    "TrendComparison",
    "TrendReport",
    "find_threshold",
    "sweep_gamma",
    "reproduce_tables",
    "asymptotic_trend_check",
    "KNOWN_OUT_OF_TOLERANCE",
]

CONDITIONS = ("lgi", "wlgi", "nsit")
VIOLATION_EPS = 1e-9
DEFAULT_LAMBDA_TOL = 1e-6
PRESCAN_POINTS = 64


class ThresholdBracketError(RuntimeError):
    """The violation predicate changed more than once over the pre-scan grid."""


@dataclass(frozen=True)
class ThresholdResult:
    """Threshold sharpness for one condition at fixed (two_j, bias).

    lambda_th is None when no violation exists anywhere on the sharpness
    range (distinct from a threshold of exactly 0, which means the
    violation persists down to zero sharpness).
    """

    condition: str
    two_j: int
    bias: float
    lambda_th: float | None
    bracket: tuple[float, float] | None
    iterations: int
    persists_to_zero: bool

    @property
    def no_violation(self) -> bool:
        return self.lambda_th is None


def _scan_predicate(violation: Callable[[float], float], hi: float,
                    tol: float) -> ThresholdResult:
    grid = hi * np.arange(1, PRESCAN_POINTS + 1) / PRESCAN_POINTS
    flags = [violation(lam) > VIOLATION_EPS for lam in grid]
    if all(flags):
        return ThresholdResult("", 0, 0.0, 0.0, None, 0, True)
    if not any(flags):
        return ThresholdResult("", 0, 0.0, None, None, 0, False)
    changes = [i for i in range(1, len(flags)) if flags[i] != flags[i - 1]]
    if len(changes) > 1:
        raise ThresholdBracketError(
            f"violation predicate changes {len(changes)} times over the pre-scan grid; "
            "single-crossing assumption does not hold")
    i = changes[0]
    lo, up = float(grid[i - 1]), float(grid[i])
    violating_above = flags[i]
    iterations = 0
    while up - lo > tol:
        mid = 0.5 * (lo + up)
        if (violation(mid) > VIOLATION_EPS) == violating_above:
            up = mid
        else:
            lo = mid
        iterations += 1
    return ThresholdResult("", 0, 0.0, 0.5 * (lo + up), (lo, up), iterations, False)


def find_threshold(sys: SpinSystem, bias: float, condition: str,
                   tol: float = DEFAULT_LAMBDA_TOL) -> ThresholdResult:
    """Threshold sharpness for one macrorealism condition.

    Pre-scans sharpness over PRESCAN_POINTS points on (0, 1 - j*bias],
    bisects the single predicate change to within tol, and reports
    persistence to zero when the violation exceeds VIOLATION_EPS at every
    scanned point.
    """
    if condition not in CONDITIONS:
        raise ValueError(f"condition must be one of {CONDITIONS}, got {condition!r}")
    validity = validate_params(sys, MeasurementParams(0.0, bias))
    if not validity.valid:
        raise InvalidMeasurementParams(validity.binding_constraint)
    hi = 1.0 - sys.j * bias

    def violation(sharpness: float) -> float:
        scores = evaluate_mr(ProtocolSpec(sys, MeasurementParams(sharpness, bias)))
        return scores.violation(condition)

    scan = _scan_predicate(violation, hi, tol)
    return ThresholdResult(condition, sys.two_j, bias, scan.lambda_th,
                           scan.bracket, scan.iterations, scan.persists_to_zero)


@dataclass(frozen=True)
class SweepRow:
    """One evaluated grid point of a bias sweep."""

    two_j: int
    sharpness: float
    bias: float
    k_lgi: float
    lgi_violation: float
    k_wlgi: float
    k_nsit: float


def _sweep_row(sys: SpinSystem, sharpness: float, bias: float) -> SweepRow:
    scores = evaluate_mr(ProtocolSpec(sys, MeasurementParams(sharpness, bias)))
    return SweepRow(sys.two_j, sharpness, bias, scores.k_lgi,
                    scores.lgi_violation, scores.k_wlgi, scores.k_nsit)


def sweep_gamma(sys: SpinSystem, sharpness: float, bias_grid: Sequence[float],
                max_workers: int | None = 1) -> list[SweepRow]:
    """Evaluate the functionals over a bias grid, preserving grid order.

    Every grid point is validated before any computation starts, so an
    invalid point is reported by position instead of failing mid-sweep.
    Grid points are independent; max_workers > 1 evaluates them in a
    thread pool with identical results.
    """
    for position, bias in enumerate(bias_grid):
        validity = validate_params(sys, MeasurementParams(sharpness, bias))
        if not validity.valid:
            raise InvalidMeasurementParams(
                f"grid point {position} (bias = {bias:g}): {validity.binding_constraint}")
    points = list(bias_grid)
    if max_workers is not None and max_workers <= 1 or len(points) <= 1:
        return [_sweep_row(sys, sharpness, bias) for bias in points]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda bias: _sweep_row(sys, sharpness, bias), points))


# ---------------------------------------------------------------------------
# Reference tables from the study being reproduced.
#
# Table 1: threshold sharpness (lgi, wlgi, nsit) per (j, bias).
# Table 2: thresholds at the mid-range bias 1/(2j).
# Table 3: violation magnitudes at sharpness 0.5; the bias column prints
#          rounded values of the exact fractions 1/(4j) and 1/(2j), so both
#          variants are evaluated.
# ---------------------------------------------------------------------------

TABLE1_REFERENCE: tuple[tuple[int, float, tuple[float, float, float]], ...] = (
    (30, 0.000, (0.29, 0.23, 0.0)),
    (30, 0.030, (0.22, 0.16, 0.0)),
    (30, 0.050, (0.14, 0.12, 0.0)),
    (40, 0.000, (0.26, 0.20, 0.0)),
    (40, 0.025, (0.18, 0.14, 0.0)),
    (40, 0.040, (0.10, 0.09, 0.0)),
    (50, 0.000, (0.23, 0.18, 0.0)),
    (50, 0.020, (0.16, 0.13, 0.0)),
    (50, 0.030, (0.11, 0.09, 0.0)),
)

TABLE2_REFERENCE: tuple[tuple[int, tuple[float, float, float]], ...] = (
    (30, (0.21, 0.16, 0.0)),
    (40, (0.18, 0.14, 0.0)),
    (50, (0.16, 0.13, 0.0)),
)

TABLE3_SHARPNESS = 0.5
TABLE3_REFERENCE: tuple[tuple[int, float, float, tuple[float, float, float]], ...] = (
    # (two_j, printed bias, exact-fraction bias, (lgi_violation, k_wlgi, |k_nsit|))
    (30, 0.000, 0.0,       (0.2504, 0.1410, 0.1569)),
    (30, 0.017, 1.0 / 60,  (0.2821, 0.1490, 0.1570)),
    (30, 0.033, 1.0 / 30,  (0.3139, 0.1571, 0.1572)),
    (40, 0.000, 0.0,       (0.2855, 0.1548, 0.1668)),
    (40, 0.012, 1.0 / 80,  (0.3096, 0.1608, 0.1669)),
    (40, 0.025, 1.0 / 40,  (0.3342, 0.1671, 0.1671)),
    (50, 0.000, 0.0,       (0.3092, 0.1643, 0.1740)),
    (50, 0.010, 1.0 / 100, (0.3268, 0.1692, 0.1741)),
    (50, 0.020, 1.0 / 50,  (0.3484, 0.1742, 0.1742)),
)

THRESHOLD_TOL = 0.01
VIOLATION_TABLE_TOL = 1e-3

# Cells whose reference values two independent simulation routes place
# outside the stated tolerance (see README for the analysis); everything
# else reproduces within tolerance.
KNOWN_OUT_OF_TOLERANCE: tuple[tuple[int, int, float, str], ...] = (
    # (table, two_j, bias, quantity)
    (1, 30, 0.030, "wlgi"),   # computed 0.1706 vs reference 0.16
    (3, 50, 0.010, "lgi_violation"),  # computed 0.3287 vs reference 0.3268
)


@dataclass(frozen=True)
class CellComparison:
    """Computed-versus-reference comparison for one table cell."""

    table: int
    two_j: int
    bias: float
    quantity: str
    computed: float
    reference: float
    deviation: float
    within_tol: bool
    tolerance: float
    computed_exact_bias: float | None = None


@dataclass(frozen=True)
class TableReport:
    table: int
    cells: tuple[CellComparison, ...]

    @property
    def all_within_tol(self) -> bool:
        return all(cell.within_tol for cell in self.cells)

    def out_of_tolerance(self) -> tuple[CellComparison, ...]:
        return tuple(cell for cell in self.cells if not cell.within_tol)


def _threshold_value(result: ThresholdResult) -> float:
    if result.no_violation:
        return math.nan
    return result.lambda_th


def _threshold_cells(table: int, two_j: int, bias: float,
                     reference: tuple[float, float, float]) -> list[CellComparison]:
    sys = SpinSystem(two_j)
    cells = []
    for condition, ref in zip(CONDITIONS, reference):
        computed = _threshold_value(find_threshold(sys, bias, condition))
        deviation = computed - ref
        cells.append(CellComparison(
            table=table, two_j=two_j, bias=bias, quantity=condition,
            computed=computed, reference=ref, deviation=deviation,
            within_tol=abs(deviation) <= THRESHOLD_TOL, tolerance=THRESHOLD_TOL))
    return cells


def reproduce_table1() -> TableReport:
    cells: list[CellComparison] = []
    for two_j, bias, reference in TABLE1_REFERENCE:
        cells.extend(_threshold_cells(1, two_j, bias, reference))
    return TableReport(1, tuple(cells))


def reproduce_table2() -> TableReport:
    cells: list[CellComparison] = []
    for two_j, reference in TABLE2_REFERENCE:
        cells.extend(_threshold_cells(2, two_j, 1.0 / two_j, reference))
    return TableReport(2, tuple(cells))


def _violation_triple(scores: MrScores) -> tuple[float, float, float]:
    return (scores.lgi_violation, scores.k_wlgi, abs(scores.k_nsit))


def reproduce_table3() -> TableReport:
    cells: list[CellComparison] = []
    for two_j, bias, exact_bias, reference in TABLE3_REFERENCE:
        sys = SpinSystem(two_j)
        printed = _violation_triple(evaluate_mr(
            ProtocolSpec(sys, MeasurementParams(TABLE3_SHARPNESS, bias))))
        exact = _violation_triple(evaluate_mr(
            ProtocolSpec(sys, MeasurementParams(TABLE3_SHARPNESS, exact_bias))))
        for quantity, value, exact_value, ref in zip(
                ("lgi_violation", "k_wlgi", "k_nsit"), printed, exact, reference):
            deviation = value - ref
            cells.append(CellComparison(
                table=3, two_j=two_j, bias=bias, quantity=quantity,
                computed=value, reference=ref, deviation=deviation,
                within_tol=abs(deviation) <= VIOLATION_TABLE_TOL,
                tolerance=VIOLATION_TABLE_TOL, computed_exact_bias=exact_value))
    return TableReport(3, tuple(cells))


def reproduce_tables(tables: Iterable[int] = (1, 2, 3)) -> list[TableReport]:
    """Re-run the exact parameter grids of the reference tables."""
    builders = {1: reproduce_table1, 2: reproduce_table2, 3: reproduce_table3}
    reports = []
    for table in tables:
        if table not in builders:
            raise ValueError(f"no reference data for table {table!r}")
        reports.append(builders[table]())
    return reports


@dataclass(frozen=True)
class TrendComparison:
    condition: str
    two_j_smaller: int
    two_j_larger: int
    value_smaller: float
    value_larger: float
    holds: bool


@dataclass(frozen=True)
class TrendReport:
    threshold_comparisons: tuple[TrendComparison, ...]
    bias_ceiling_comparisons: tuple[TrendComparison, ...]

    @property
    def holds(self) -> bool:
        return all(c.holds for c in
                   self.threshold_comparisons + self.bias_ceiling_comparisons)


def asymptotic_trend_check(two_j_list: Sequence[int],
                           conditions: Sequence[str] = ("lgi", "wlgi"),
                           bias_rule: Callable[[float], float] | None = None,
                           tol: float = DEFAULT_LAMBDA_TOL) -> TrendReport:
    """Check threshold decrease with spin and the shrinking bias range.

    For each consecutive pair of the ascending spin list, verifies that
    the threshold sharpness at bias_rule(j) (default: the mid-range bias
    1/(2j)) does not increase, and that the admissible bias ceiling 1/j
    strictly shrinks.
    """
    if list(two_j_list) != sorted(two_j_list):
        raise ValueError("two_j_list must be ascending")
    if bias_rule is None:
        bias_rule = lambda j: 1.0 / (2.0 * j)
    thresholds = {
        (two_j, condition): _threshold_value(
            find_threshold(SpinSystem(two_j), bias_rule(two_j / 2.0), condition, tol))
        for two_j in two_j_list for condition in conditions
    }
    threshold_cmps = []
    ceiling_cmps = []
    for smaller, larger in zip(two_j_list, list(two_j_list)[1:]):
        for condition in conditions:
            a, b = thresholds[(smaller, condition)], thresholds[(larger, condition)]
            threshold_cmps.append(TrendComparison(condition, smaller, larger, a, b, b <= a + tol))
        ceiling_cmps.append(TrendComparison(
            "bias-ceiling", smaller, larger, 2.0 / smaller, 2.0 / larger,
            2.0 / larger < 2.0 / smaller))
    return TrendReport(tuple(threshold_cmps), tuple(ceiling_cmps))
