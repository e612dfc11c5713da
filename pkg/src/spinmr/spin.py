"""Spin-j operators and precession propagators.

The z basis is ordered by ascending magnetic quantum number m, so the
state |m> lives at index m + j (an integer in [0, 2j]).  Time enters
every routine only as the dimensionless precession phase theta = Omega*t;
the field strength and precession frequency are never stored separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

__all__ = [
    "SpinSystem",
    "Propagator",
    "build_jz",
    "build_jx",
    "rotation",
    "pi_half_transition_prob",
    "pi_half_transition_probs",
]


@dataclass(frozen=True)
class SpinSystem:
    """A spin-j degree of freedom, parameterized by the integer 2j.

    Using two_j avoids half-integer bookkeeping: j = two_j / 2 may be
    half-integral, while dimensions and basis indices stay integers.
    """

    two_j: int

    def __post_init__(self) -> None:
        if not isinstance(self.two_j, (int, np.integer)) or self.two_j < 0:
            raise ValueError(f"two_j must be a non-negative integer, got {self.two_j!r}")

    @property
    def j(self) -> float:
        return self.two_j / 2.0

    @property
    def dim(self) -> int:
        return self.two_j + 1

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers -j, -j+1, ..., +j in basis order."""
        return np.arange(self.dim) - self.j

    def index_of(self, m: float) -> int:
        """Basis index of |m>, i.e. m + j."""
        idx = m + self.j
        rounded = int(round(idx))
        if abs(idx - rounded) > 1e-9 or not 0 <= rounded < self.dim:
            raise ValueError(f"m = {m} is not a magnetic quantum number for two_j = {self.two_j}")
        return rounded


@dataclass(frozen=True)
class Propagator:
    """Unitary e^{-i*theta*Jx} for one precession phase theta."""

    theta: float
    matrix: np.ndarray


def build_jz(sys: SpinSystem) -> np.ndarray:
    """Diagonal Jz with eigenvalue m at index m + j."""
    return np.diag(sys.m_values())


def _jx_offdiagonal(sys: SpinSystem) -> np.ndarray:
    j = sys.j
    m = sys.m_values()[:-1]
    return 0.5 * np.sqrt(j * (j + 1) - m * (m + 1))


def build_jx(sys: SpinSystem) -> np.ndarray:
    """Real symmetric tridiagonal Jx, <m+1|Jx|m> = sqrt(j(j+1) - m(m+1))/2."""
    off = _jx_offdiagonal(sys)
    jx = np.zeros((sys.dim, sys.dim))
    idx = np.arange(sys.dim - 1)
    jx[idx, idx + 1] = off
    jx[idx + 1, idx] = off
    return jx


@lru_cache(maxsize=None)
def _jx_eigenvectors(two_j: int) -> np.ndarray:
    """Orthonormal eigenvectors of Jx, columns ordered by ascending eigenvalue.

    The corresponding eigenvalues are exactly -j, -j+1, ..., +j; the
    computed ones are discarded in favor of that exact spectrum.
    """
    sys = SpinSystem(two_j)
    if sys.dim == 1:
        vec = np.ones((1, 1))
    else:
        _, vec = eigh_tridiagonal(np.zeros(sys.dim), _jx_offdiagonal(sys))
    vec.setflags(write=False)
    return vec


def rotation(sys: SpinSystem, theta: float) -> Propagator:
    """Precession propagator e^{-i*theta*Jx}.

    Built from the eigendecomposition of the tridiagonal Jx with the
    spectrum snapped to the exact values -j..+j, which keeps products of
    rotations and full 2*pi turns accurate at large dimension.
    """
    if not math.isfinite(theta):
        raise ValueError(f"rotation phase must be finite, got {theta!r}")
    vec = _jx_eigenvectors(sys.two_j)
    phases = np.exp(-1j * theta * sys.m_values())
    matrix = (vec * phases) @ vec.T
    return Propagator(theta=theta, matrix=matrix)


def pi_half_transition_prob(sys: SpinSystem, k: float) -> float:
    """|<k| e^{-i(pi/2)Jx} |-j>|^2 = binom(2j, j+k) / 4^j.

    Evaluated as a single exponential of log-gamma differences so it
    neither overflows nor underflows to 0/inf even for two_j of several
    hundred (raw factorials die near 2j ~ 170).
    """
    idx = sys.index_of(k)  # validates k
    n = sys.two_j
    return float(np.exp(gammaln(n + 1) - gammaln(idx + 1) - gammaln(n - idx + 1) - n * math.log(2)))


def pi_half_transition_probs(sys: SpinSystem) -> np.ndarray:
    """All pi/2 transition probabilities from |-j>, indexed by m + j."""
    n = sys.two_j
    idx = np.arange(sys.dim)
    return np.exp(gammaln(n + 1) - gammaln(idx + 1) - gammaln(n - idx + 1) - n * math.log(2))
