"""
Logarithmic barrier attitude-error function and the inequalities bounding it.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from utils.constants import QE4_BARRIER_MIN
from utils.exceptions import BarrierBlowupError


@dataclass(frozen=True)
class AefParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError(f"AEF gains must be positive (alpha={self.alpha}, beta={self.beta})")


def _check_scalar_part(q_e4: float):
    if abs(q_e4) < QE4_BARRIER_MIN:
        raise BarrierBlowupError(
            f"Scalar part of the error quaternion is {q_e4:.3e}; barrier is unbounded",
            details={'q_e4': float(q_e4)},
        )


def barrier_value(q_e: np.ndarray, alpha: float) -> float:
    """V_q = -alpha ln(q_e4^2)."""
    _check_scalar_part(q_e[3])
    return -alpha * np.log(q_e[3] ** 2)


def gibbs_vector(q_e: np.ndarray) -> np.ndarray:
    """xi = q_ev / q_e4."""
    _check_scalar_part(q_e[3])
    return q_e[:3] / q_e[3]


def log_barrier_gap(q_e4: float) -> float:
    """(1 - q_e4^2)/|q_e4| + ln(q_e4^2); non-negative on 0 < |q_e4| <= 1."""
    return (1.0 - q_e4 ** 2) / abs(q_e4) + np.log(q_e4 ** 2)


def quadratic_bounds(delta: float, alpha: float) -> Tuple[float, float]:
    """Quadratic bounds a_lo ||q_ev||^2 <= V_q <= a_hi ||q_ev||^2 valid for |q_e4| in [delta, 1]."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    lower = min(1.0, alpha)
    upper = -alpha * np.log(delta ** 2) / (1.0 - delta ** 2)
    return lower, upper
