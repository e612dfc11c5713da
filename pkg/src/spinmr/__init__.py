"""Quantum violations of macrorealism for precessing spin-j systems.

Simulates sequential biased-unsharp measurements of the z spin component
on a spin-j system precessing about x, and quantifies the violation of
three macrorealism conditions: the Leggett-Garg inequality (K_LGI <= 1),
its Wigner form (K_WLGI <= 0) and no-signalling in time (K_NSIT = 0).
"""

from .analysis import (
    SweepRow,
    ThresholdBracketError,
    ThresholdResult,
    asymptotic_trend_check,
    find_threshold,
    reproduce_tables,
    sweep_gamma,
)
from .formulas import ClosedFormReport, cross_validate, k_lgi_closed, p12_plus_minus_closed
from .povm import (
    BiasedUnsharpPovm,
    InvalidMeasurementParams,
    MeasurementParams,
    ParamsValidity,
    build_effects,
    validate_params,
)
from .protocol import (
    JointProbabilityTable,
    MrScores,
    NumericalConsistencyError,
    ProtocolSpec,
    correlator,
    evaluate_mr,
    joint_distribution,
    single_time_distribution,
)
from .spin import (
    Propagator,
    SpinSystem,
    build_jx,
    build_jz,
    pi_half_transition_prob,
    pi_half_transition_probs,
    rotation,
)

__version__ = "0.1.0"

__all__ = [
    "SpinSystem",
    "Propagator",
    "build_jx",
    "build_jz",
    "rotation",
    "pi_half_transition_prob",
    "pi_half_transition_probs",
    "MeasurementParams",
    "ParamsValidity",
    "BiasedUnsharpPovm",
    "InvalidMeasurementParams",
    "validate_params",
    "build_effects",
    "ProtocolSpec",
    "JointProbabilityTable",
    "MrScores",
    "NumericalConsistencyError",
    "single_time_distribution",
    "joint_distribution",
    "correlator",
    "evaluate_mr",
    "ClosedFormReport",
    "p12_plus_minus_closed",
    "k_lgi_closed",
    "cross_validate",
    "ThresholdResult",
    "ThresholdBracketError",
    "SweepRow",
    "find_threshold",
    "sweep_gamma",
    "reproduce_tables",
    "asymptotic_trend_check",
    "__version__",
]
