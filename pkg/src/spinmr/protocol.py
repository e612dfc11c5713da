"""Three-time measurement protocol and the macrorealism functionals.

The system starts in |-j>, precesses about x, and the dichotomic
observable Q is read out from the z measurement with the one-versus-
remaining grouping: Q = -1 exactly when m = -j, else Q = +1.  The
measurement phases are pi to the first time and pi/2 between consecutive
times, so the three times sit at accumulated phases pi, 3pi/2 and 2pi.

Every two-time probability comes from its own run set: only the two
stated times are measured and the state evolves undisturbed through any
skipped time.  The first measurement branches over the fine-grained
outcome k with the unnormalized update rho -> sqrt(F_k) rho sqrt(F_k);
the grouping is applied to probabilities only, never to the instrument.
Branch weights are carried through unnormalized, which avoids dividing
by near-zero branch probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .povm import BiasedUnsharpPovm, MeasurementParams, build_effects
from .spin import SpinSystem, rotation

__all__ = [
    "ProtocolSpec",
    "JointProbabilityTable",
    "MrScores",
    "NumericalConsistencyError",
    "MEASUREMENT_PAIRS",
    "single_time_distribution",
    "joint_distribution",
    "correlator",
    "evaluate_mr",
]

# Tolerances for internal consistency of computed probability tables.
NEGATIVE_PROBABILITY_TOL = 1e-10
NORMALIZATION_TOL = 1e-10

MEASUREMENT_PAIRS = ((1, 2), (2, 3), (1, 3))


class NumericalConsistencyError(RuntimeError):
    """A probability fell outside tolerance; signals a numerics bug."""


@dataclass(frozen=True)
class ProtocolSpec:
    """Fixed measurement scenario for one (spin, measurement) choice.

    The initial state, measurement times and dichotomization are part of
    the protocol and not configurable: state |-j>, first measurement at
    accumulated phase pi, subsequent measurements pi/2 apart.
    """

    sys: SpinSystem
    params: MeasurementParams
    phase_to_t1: float = math.pi
    phase_between: float = math.pi / 2

    def accumulated_phase(self, time_index: int) -> float:
        if time_index not in (1, 2, 3):
            raise ValueError(f"time_index must be 1, 2 or 3, got {time_index!r}")
        return self.phase_to_t1 + (time_index - 1) * self.phase_between

    def initial_state(self) -> np.ndarray:
        """Density matrix |-j><-j| (index 0 in the ascending-m basis)."""
        rho = np.zeros((self.sys.dim, self.sys.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def povm(self) -> BiasedUnsharpPovm:
        return build_effects(self.sys, self.params)


@dataclass(frozen=True)
class JointProbabilityTable:
    """P(q_a, q_b) for one ordered pair of measurement times, q in {+1, -1}."""

    pair: tuple[int, int]
    p_plus_plus: float
    p_plus_minus: float
    p_minus_plus: float
    p_minus_minus: float

    def probability(self, q_first: int, q_second: int) -> float:
        return {
            (+1, +1): self.p_plus_plus,
            (+1, -1): self.p_plus_minus,
            (-1, +1): self.p_minus_plus,
            (-1, -1): self.p_minus_minus,
        }[(q_first, q_second)]

    def first_marginal(self, q_first: int) -> float:
        if q_first == +1:
            return self.p_plus_plus + self.p_plus_minus
        return self.p_minus_plus + self.p_minus_minus


@dataclass(frozen=True)
class MrScores:
    """The three macrorealism functionals at one parameter point."""

    k_lgi: float
    k_wlgi: float
    k_nsit: float

    @property
    def lgi_violation(self) -> float:
        return self.k_lgi - 1.0

    @property
    def wlgi_violation(self) -> float:
        return max(self.k_wlgi, 0.0)

    @property
    def nsit_violation(self) -> float:
        return abs(self.k_nsit)

    def violation(self, condition: str) -> float:
        """Signed violation measure used by threshold searches."""
        if condition == "lgi":
            return self.lgi_violation
        if condition == "wlgi":
            return self.k_wlgi
        if condition == "nsit":
            return self.nsit_violation
        raise ValueError(f"unknown macrorealism condition {condition!r}")


def _evolved_initial_vector(sys: SpinSystem, phase: float) -> np.ndarray:
    # U |-j> is the first column of the propagator.
    return rotation(sys, phase).matrix[:, 0]


def _grouped_single(povm: BiasedUnsharpPovm, amplitudes: np.ndarray) -> dict[int, float]:
    weights = povm.effect_diagonals @ np.abs(amplitudes) ** 2
    return {-1: float(weights[0]), +1: float(weights[1:].sum())}


def single_time_distribution(spec: ProtocolSpec, time_index: int) -> dict[int, float]:
    """P(Q = +-1) at one time with no earlier measurement performed."""
    povm = spec.povm()
    psi = _evolved_initial_vector(spec.sys, spec.accumulated_phase(time_index))
    return _grouped_single(povm, psi)


def _fine_grained_joint(povm: BiasedUnsharpPovm, pre_phase: float,
                        mid_phase: float) -> np.ndarray:
    """P[k, m]: outcome k at the first time, m at the second.

    The initial state is pure, so each unnormalized branch
    sqrt(F_k)|psi> stays a vector; all branches evolve in one matrix
    product and the second-time effects contract against |amplitude|^2.
    """
    sys = povm.sys
    psi = _evolved_initial_vector(sys, pre_phase)
    branches = povm.sqrt_diagonals.T * psi[:, None]  # column k = sqrt(F_k)|psi>
    evolved = rotation(sys, mid_phase).matrix @ branches
    populations = np.abs(evolved) ** 2
    return (povm.effect_diagonals @ populations).T


def joint_distribution(spec: ProtocolSpec, pair: tuple[int, int]) -> JointProbabilityTable:
    """Grouped two-time table P(q_a, q_b) for pair (a, b) with a < b."""
    if tuple(pair) not in MEASUREMENT_PAIRS:
        raise ValueError(f"pair must be one of {MEASUREMENT_PAIRS}, got {pair!r}")
    a, b = pair
    pre = spec.accumulated_phase(a)
    mid = spec.accumulated_phase(b) - pre
    fine = _fine_grained_joint(spec.povm(), pre, mid)
    table = JointProbabilityTable(
        pair=(a, b),
        p_plus_plus=float(fine[1:, 1:].sum()),
        p_plus_minus=float(fine[1:, 0].sum()),
        p_minus_plus=float(fine[0, 1:].sum()),
        p_minus_minus=float(fine[0, 0]),
    )
    return _checked(table)


def _checked(table: JointProbabilityTable) -> JointProbabilityTable:
    entries = [table.p_plus_plus, table.p_plus_minus, table.p_minus_plus, table.p_minus_minus]
    for value in entries:
        if value < -NEGATIVE_PROBABILITY_TOL or value > 1.0 + NEGATIVE_PROBABILITY_TOL:
            raise NumericalConsistencyError(
                f"joint probability {value!r} outside [0, 1] for pair {table.pair}")
    total = sum(entries)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NumericalConsistencyError(
            f"joint probabilities sum to {total!r} for pair {table.pair}")
    clamped = [min(max(value, 0.0), 1.0) for value in entries]
    return JointProbabilityTable(table.pair, *clamped)


def correlator(table: JointProbabilityTable) -> float:
    """Two-time correlator <Q_a Q_b> of a joint table."""
    return (table.p_plus_plus + table.p_minus_minus
            - table.p_plus_minus - table.p_minus_plus)


def evaluate_mr(spec: ProtocolSpec) -> MrScores:
    """All three macrorealism functionals, each pair from its own run set.

    K_LGI  = C12 + C23 - C13
    K_WLGI = P(Q2+,Q3+) - P(Q1-,Q2+) - P(Q1+,Q3+)
    K_NSIT = P(Q3-) - [P(Q2+,Q3-) + P(Q2-,Q3-)], signed; the prior
             measurement sits at t2 and t1 is unused.
    """
    t12 = joint_distribution(spec, (1, 2))
    t23 = joint_distribution(spec, (2, 3))
    t13 = joint_distribution(spec, (1, 3))
    k_lgi = correlator(t12) + correlator(t23) - correlator(t13)
    k_wlgi = t23.p_plus_plus - t12.p_minus_plus - t13.p_plus_plus
    undisturbed = single_time_distribution(spec, 3)
    k_nsit = undisturbed[-1] - (t23.p_plus_minus + t23.p_minus_minus)
    return MrScores(k_lgi=k_lgi, k_wlgi=k_wlgi, k_nsit=k_nsit)
