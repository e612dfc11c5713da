"""Biased unsharp POVM for a one-shot Jz measurement.

Each effect mixes the projector onto |m> with a bias-shifted multiple of
the identity:

    F_m = sharpness * P_m + (1 + m*bias - sharpness) / (2j+1) * I

All effects are diagonal in the z basis, so they are stored as diagonal
vectors and their square roots are taken elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spin import SpinSystem

__all__ = [
    "MeasurementParams",
    "ParamsValidity",
    "BiasedUnsharpPovm",
    "InvalidMeasurementParams",
    "validate_params",
    "build_effects",
]

# Inclusive slack for parameters sitting exactly on a validity boundary.
BOUNDARY_TOL = 1e-12


class InvalidMeasurementParams(ValueError):
    """Measurement parameters outside the positivity region."""


@dataclass(frozen=True)
class MeasurementParams:
    """Sharpness (projective weight) and bias (outcome preference) of the POVM."""

    sharpness: float
    bias: float


@dataclass(frozen=True)
class ParamsValidity:
    """Outcome of a validity check, with the binding constraint when invalid."""

    valid: bool
    binding_constraint: str | None
    sharpness_max: float
    bias_max: float


def validate_params(sys: SpinSystem, params: MeasurementParams) -> ParamsValidity:
    """Check 0 <= bias <= 1/j and 0 <= sharpness <= 1 - j*bias.

    Both bounds are inclusive within BOUNDARY_TOL.  Invalid parameters are
    reported, not raised; the report names the violated inequality.
    """
    j = sys.j
    if sys.two_j == 0:
        return ParamsValidity(False, "two_j must be >= 1 (j = 0 admits no bias range)",
                              sharpness_max=float("nan"), bias_max=float("nan"))
    bias_max = 1.0 / j
    sharpness_max = 1.0 - j * params.bias
    constraint = None
    if params.bias < -BOUNDARY_TOL:
        constraint = f"gamma {params.bias:g} is negative"
    elif params.bias > bias_max + BOUNDARY_TOL:
        constraint = f"gamma {params.bias:g} exceeds 1/j = {bias_max:g}"
    elif params.sharpness < -BOUNDARY_TOL:
        constraint = f"lambda {params.sharpness:g} is negative"
    elif params.sharpness > sharpness_max + BOUNDARY_TOL:
        constraint = (f"lambda {params.sharpness:g} exceeds "
                      f"1 - j*gamma = {sharpness_max:g}")
    return ParamsValidity(constraint is None, constraint, sharpness_max, bias_max)


@dataclass(frozen=True)
class BiasedUnsharpPovm:
    """The 2j+1 effects and their square roots, as diagonal vectors.

    effect_diagonals[k, i] is the i-th diagonal entry of the effect for
    outcome m_k; rows sum columnwise to 1 (completeness).
    """

    sys: SpinSystem
    params: MeasurementParams
    effect_diagonals: np.ndarray
    sqrt_diagonals: np.ndarray

    def effect_matrix(self, m: float) -> np.ndarray:
        """Dense matrix of the effect for outcome m (diagonal by construction)."""
        return np.diag(self.effect_diagonals[self.sys.index_of(m)])


def build_effects(sys: SpinSystem, params: MeasurementParams) -> BiasedUnsharpPovm:
    """Construct the full effect set, raising if the parameters are invalid."""
    validity = validate_params(sys, params)
    if not validity.valid:
        raise InvalidMeasurementParams(validity.binding_constraint)
    d = sys.dim
    m = sys.m_values()
    background = (1.0 + m * params.bias - params.sharpness) / d
    diagonals = np.tile(background[:, None], (1, d))
    idx = np.arange(d)
    diagonals[idx, idx] = (1.0 + 2.0 * sys.j * params.sharpness + m * params.bias) / d
    # On the boundary sharpness = 1 - j*bias the smallest entry is exactly 0;
    # rounding (and the inclusive BOUNDARY_TOL) can land it a hair below.
    diagonals[(diagonals < 0) & (diagonals > -1e-11)] = 0.0
    diagonals.setflags(write=False)
    roots = np.sqrt(diagonals)
    roots.setflags(write=False)
    return BiasedUnsharpPovm(sys=sys, params=params,
                             effect_diagonals=diagonals, sqrt_diagonals=roots)
