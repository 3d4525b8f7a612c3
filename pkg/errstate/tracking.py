"""
Tracking-error construction.
"""
import logging
from dataclasses import dataclass

import numpy as np

from attmath.quaternion import quat_error, rotmat
from plant.dynamics import BodyState
from plant.reference import ReferenceState
from utils.constants import QE4_INIT_MIN
from utils.exceptions import PermissibleSetError

logger = logging.getLogger(__name__)


@dataclass
class TrackingError:
    q_e: np.ndarray
    omega_e: np.ndarray
    s: np.ndarray
    lambda_slope: float
    C: np.ndarray

    @property
    def q_ev(self) -> np.ndarray:
        return self.q_e[:3]

    @property
    def q_e4(self) -> float:
        return self.q_e[3]


def initial_slope(q_e: np.ndarray, beta: float) -> float:
    """Lambda = beta sign(q_e4(0)), frozen for the whole run."""
    if abs(q_e[3]) < QE4_INIT_MIN:
        logger.warning(f"Initial error quaternion outside permissible set: q_e4(0)={q_e[3]:.3e}")
        raise PermissibleSetError(
            f"|q_e4(0)| = {abs(q_e[3]):.3e} is below {QE4_INIT_MIN:g}; "
            "the initial attitude lies outside the permissible set",
            details={'q_e': q_e.tolist()},
        )
    return beta if q_e[3] > 0 else -beta


def make_tracking_error(body: BodyState, ref: ReferenceState, lambda_slope: float) -> TrackingError:
    q_e = quat_error(body.q, ref.q_r)
    C = rotmat(q_e)
    omega_e = body.omega - C @ ref.omega_r
    s = omega_e + lambda_slope * q_e[:3]
    return TrackingError(q_e, omega_e, s, lambda_slope, C)
