"""Render violation-versus-bias figures from spinmr sweep CSVs.

This package does no physics: every plotted number is read verbatim from
a CSV produced by the primary component's ``sweep`` command, whose
schema is frozen as

    two_j,lambda,gamma,k_lgi,lgi_violation,k_wlgi,k_nsit

Each figure draws one curve per input CSV (one spin value per file)
against the bias on the horizontal axis, plus the classical bound as a
horizontal black line (K_LGI = 1; K_WLGI = 0; K_NSIT = 0).  Rendering is
deterministic: fixed styles, fixed canvas, no timestamps.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

__all__ = [
    "SWEEP_CSV_HEADER",
    "FIGURES",
    "FigureSpec",
    "Series",
    "CsvFormatError",
    "read_series",
    "render",
]

SWEEP_CSV_HEADER = "two_j,lambda,gamma,k_lgi,lgi_violation,k_wlgi,k_nsit"

# figure id -> (CSV column, classical bound, axis label)
FIGURES = {
    "lgi": ("k_lgi", 1.0, "K_LGI"),
    "wlgi": ("k_wlgi", 0.0, "K_WLGI"),
    "nsit": ("k_nsit", 0.0, "K_NSIT"),
}

# Curve colors follow the reference captions: green j=25, red j=20, blue j=15.
CURVE_COLORS = {25.0: "green", 20.0: "red", 15.0: "blue"}
FALLBACK_COLORS = ("purple", "orange", "teal", "brown", "magenta")


class CsvFormatError(ValueError):
    """A sweep CSV is malformed; the message carries file and line."""


@dataclass(frozen=True)
class Series:
    path: str
    j: float
    bias: tuple[float, ...]
    values: tuple[float, ...]


@dataclass(frozen=True)
class FigureSpec:
    figure: str
    csv_paths: tuple[str, ...]
    out_path: str

    def __post_init__(self) -> None:
        if self.figure not in FIGURES:
            raise ValueError(f"figure must be one of {sorted(FIGURES)}, got {self.figure!r}")

    @property
    def bound(self) -> float:
        return FIGURES[self.figure][1]


def read_series(path: str, column: str) -> Series:
    """Read one sweep CSV, validating the frozen schema."""
    columns = SWEEP_CSV_HEADER.split(",")
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}:1: empty file") from None
        if header != columns:
            raise CsvFormatError(
                f"{path}:1: header {','.join(header)!r} does not match the frozen "
                f"schema {SWEEP_CSV_HEADER!r}")
        index = columns.index(column)
        two_j_values, bias, values = [], [], []
        for line_number, row in enumerate(reader, start=2):
            if len(row) != len(columns):
                raise CsvFormatError(f"{path}:{line_number}: expected "
                                     f"{len(columns)} fields, got {len(row)}")
            try:
                two_j_values.append(float(row[0]))
                bias.append(float(row[2]))
                values.append(float(row[index]))
            except ValueError as exc:
                raise CsvFormatError(f"{path}:{line_number}: {exc}") from None
    if not values:
        raise CsvFormatError(f"{path}: no data rows")
    if len(set(two_j_values)) != 1:
        raise CsvFormatError(f"{path}: expected a single two_j per file, "
                             f"found {sorted(set(two_j_values))}")
    return Series(path=path, j=two_j_values[0] / 2.0,
                  bias=tuple(bias), values=tuple(values))


def _color_for(j: float, position: int) -> str:
    return CURVE_COLORS.get(j, FALLBACK_COLORS[position % len(FALLBACK_COLORS)])


def render(spec: FigureSpec) -> None:
    """Write one figure image; raises CsvFormatError on bad input."""
    column, bound, label = FIGURES[spec.figure]
    series = [read_series(path, column) for path in spec.csv_paths]
    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=120)
    try:
        for position, one in enumerate(series):
            ax.plot(one.bias, one.values, color=_color_for(one.j, position),
                    linewidth=1.6, label=f"j = {one.j:g}")
        ax.axhline(bound, color="black", linewidth=1.2)
        ax.set_xlabel("biasedness gamma")
        ax.set_ylabel(label)
        ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        fig.savefig(spec.out_path)
    finally:
        plt.close(fig)
