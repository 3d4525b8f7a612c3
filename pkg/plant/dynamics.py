"""
Rigid-body truth model.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from attmath.inertia import InertiaParams
from attmath.quaternion import quat_derivative


@dataclass
class BodyState:
    q: np.ndarray
    omega: np.ndarray


def plant_derivative(state: BodyState, u: np.ndarray, u_d: np.ndarray,
                     inertia: InertiaParams) -> Tuple[np.ndarray, np.ndarray]:
    """Return (q_dot, omega_dot) with J omega_dot = -S(omega) J omega + u + u_d."""
    omega = state.omega
    J = inertia.matrix
    omega_dot = inertia.inverse @ (-np.cross(omega, J @ omega) + u + u_d)
    return quat_derivative(state.q, omega), omega_dot


def kinetic_energy(omega: np.ndarray, inertia: InertiaParams) -> float:
    return 0.5 * float(omega @ inertia.matrix @ omega)
