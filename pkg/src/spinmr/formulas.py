"""Closed-form expressions for cross-validation against the simulator.

These evaluate the published closed forms for the pair-(1,2) joint
probability P(Q1+, Q2-) and for K_LGI exactly as typeset.  The simulator
is authoritative: the typeset expressions are known to drop terms of
order sharpness * 4^(-j), so they track the simulator only once j is
large enough for those terms to vanish.  Reports never assert equality;
they record the discrepancy and a match flag at CROSS_VALIDATION_TOL.

The multi-line typesetting of the K_LGI expression leaves its bracket
nesting ambiguous.  The grouping used here (K_LGI_READING) was selected
as the only candidate that reproduces the simulator at large j and the
sharpness = 0 factorization limit; the alternatives diverge.

All powers 2^(2j), 4^j, 16^j enter only through their negative-exponent
counterparts exp(-2j ln 2), exp(-4j ln 2), so nothing overflows at large
spin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .povm import MeasurementParams, validate_params
from .protocol import ProtocolSpec, evaluate_mr, joint_distribution
from .spin import SpinSystem, pi_half_transition_probs

__all__ = [
    "ClosedFormReport",
    "CROSS_VALIDATION_TOL",
    "K_LGI_READING",
    "p12_plus_minus_closed",
    "k_lgi_closed",
    "cross_validate",
    "match_fractions",
]

CROSS_VALIDATION_TOL = 1e-6

K_LGI_READING = (
    "2L*[(4^j - 1)*(-2 - 4^j + 2*S) + 2*j^2*X + j*Y] for the sharpness-linear "
    "bracket; the whole A+B+C group carries the 16^(-j)/(1+2j)^2 prefactor and "
    "the correction sum is subtracted outside it"
)


@dataclass(frozen=True)
class ClosedFormReport:
    """One closed-form-vs-simulator comparison point."""

    formula: str
    two_j: int
    sharpness: float
    bias: float
    closed_form_value: float
    simulator_value: float
    discrepancy: float
    matches: bool


def _require_valid(sys: SpinSystem, params: MeasurementParams) -> None:
    validity = validate_params(sys, params)
    if not validity.valid:
        raise ValueError(f"invalid measurement parameters: {validity.binding_constraint}")


def p12_plus_minus_closed(sys: SpinSystem, params: MeasurementParams) -> float:
    """Typeset closed form for P(Q1+, Q2-).

    Known to sit sharpness * 4^(-j) below the simulated probability; the
    gap is invisible beyond j ~ 15 but dominates for small spins.
    """
    _require_valid(sys, params)
    j = sys.j
    lam, gam = params.sharpness, params.bias
    u = 1.0 - lam - j * gam
    d = 1.0 + 2.0 * j
    term1 = -(-2.0 + 2.0 * lam - gam) * j * u / d**2
    term2 = -math.expm1(-sys.two_j * math.log(2.0)) * lam * u / d
    return term1 + term2


def k_lgi_closed(sys: SpinSystem, params: MeasurementParams) -> float:
    """Typeset closed form for K_LGI under the resolved bracket reading."""
    _require_valid(sys, params)
    j = sys.j
    lam, gam = params.sharpness, params.bias
    d = 1.0 + 2.0 * j
    u = 1.0 - lam - gam * j
    a4 = math.exp(-sys.two_j * math.log(2.0))       # 4^(-j)
    a16 = math.exp(-2.0 * sys.two_j * math.log(2.0))  # 16^(-j)
    s_cross = math.sqrt((1.0 + 2.0 * lam * j - gam * j) / d) * math.sqrt(max(u, 0.0) / d)

    # a16 * (A + B + C), with every positive power absorbed analytically.
    scaled_a = 2.0 * lam**2 * (2.0 - a4 - a16 + 2.0 * j * (1.0 - a4) + 4.0 * j**2 * a16)
    scaled_b = 1.0 + 4.0 * j**2 + 2.0 * gam**2 * j**2 + 2.0 * gam * j * (2.0 * j - 1.0)
    scaled_x = (2.0 - 4.0 * a4 - 2.0 * gam * a16 - gam * a4 + gam
                - 4.0 * s_cross * a16 + 4.0 * a4 * s_cross)
    scaled_y = ((3.0 - a4 - 2.0 * a16) * gam
                + 2.0 * (2.0 * a16 + 2.0 - 3.0 * a4 - 4.0 * s_cross * a16
                         + 4.0 * a4 - 4.0 * s_cross * a16))
    scaled_c = 2.0 * lam * (-2.0 * (a4 - a16) - (1.0 - a4) + 2.0 * s_cross * (a4 - a16)
                            + 2.0 * j**2 * scaled_x + j * scaled_y)

    correction = (-lam * (-2.0 + 2.0 * lam - gam) * j / d
                  - (-2.0 + 2.0 * lam - gam) * j * u / d**2)
    weights = pi_half_transition_probs(sys)
    m = sys.m_values()
    low = (1.0 - lam + gam * m) / d
    high = (1.0 + 2.0 * lam * j + gam * m) / d
    gap = np.sqrt(np.maximum(high, 0.0)) - np.sqrt(np.maximum(low, 0.0))
    s = u / d
    per_k = weights * gap * ((lam * weights + s) * gap + 2.0 * (s + lam) * np.sqrt(np.maximum(low, 0.0)))
    correction += float(per_k[1:].sum())  # sum over k = -j+1 .. +j

    return (scaled_a + scaled_b + scaled_c) / d**2 - 2.0 * correction


def _simulator_value(formula: str, sys: SpinSystem, params: MeasurementParams) -> float:
    spec = ProtocolSpec(sys=sys, params=params)
    if formula == "pair12-plus-minus":
        return joint_distribution(spec, (1, 2)).p_plus_minus
    if formula == "k-lgi":
        return evaluate_mr(spec).k_lgi
    raise ValueError(f"unknown formula {formula!r}")


def compare(formula: str, sys: SpinSystem, params: MeasurementParams) -> ClosedFormReport:
    """Evaluate one closed form against the simulator at one point."""
    closed = {"pair12-plus-minus": p12_plus_minus_closed, "k-lgi": k_lgi_closed}[formula]
    closed_value = closed(sys, params)
    simulated = _simulator_value(formula, sys, params)
    discrepancy = abs(closed_value - simulated)
    return ClosedFormReport(
        formula=formula,
        two_j=sys.two_j,
        sharpness=params.sharpness,
        bias=params.bias,
        closed_form_value=closed_value,
        simulator_value=simulated,
        discrepancy=discrepancy,
        matches=discrepancy <= CROSS_VALIDATION_TOL,
    )


def cross_validate(two_j_values: tuple[int, ...] = (2, 4, 6, 8, 10),
                   points_per_system: int = 10,
                   seed: int = 20240801) -> list[ClosedFormReport]:
    """Both formulas over a reproducible random valid-parameter grid.

    The default grid covers j = 1..5, where the dropped 4^(-j)-scale
    terms are visible, plus the unbiased sharpness = 0.5 point of each
    system as a deterministic anchor.
    """
    rng = np.random.default_rng(seed)
    reports: list[ClosedFormReport] = []
    for two_j in two_j_values:
        sys = SpinSystem(two_j)
        points = [MeasurementParams(0.5, 0.0)]
        for _ in range(points_per_system):
            bias = rng.uniform(0.0, 1.0 / sys.j)
            sharpness = rng.uniform(0.0, 1.0 - sys.j * bias)
            points.append(MeasurementParams(sharpness, bias))
        for params in points:
            for formula in ("pair12-plus-minus", "k-lgi"):
                reports.append(compare(formula, sys, params))
    return reports


def match_fractions(reports: list[ClosedFormReport]) -> dict[str, float]:
    """Fraction of comparison points within tolerance, per formula."""
    fractions: dict[str, float] = {}
    for formula in sorted({r.formula for r in reports}):
        subset = [r for r in reports if r.formula == formula]
        fractions[formula] = sum(r.matches for r in subset) / len(subset)
    return fractions
