"""
Reference trajectory: the same scalar rate profile on all three axes.

    f(t) = 0.3 (1 - g) cos t + t g (0.08 pi + 0.006 sin t),   g = exp(-0.01 t^2)

The first and second derivatives are closed-form. q_r itself is integrated
alongside the plant, so only rates come from here.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from attmath.quaternion import IDENTITY

ONES = np.ones(3)


@dataclass
class ReferenceState:
    q_r: np.ndarray
    omega_r: np.ndarray
    omega_r_dot: np.ndarray
    omega_r_ddot: np.ndarray


def reference_profile(t: float) -> Tuple[float, float, float]:
    """Scalar rate profile and its first two time derivatives."""
    g = np.exp(-0.01 * t * t)
    g1 = -0.02 * t * g
    g2 = (-0.02 + 0.0004 * t * t) * g
    c, s = np.cos(t), np.sin(t)

    f1 = 0.3 * (1.0 - g) * c
    f1_d = 0.3 * (-g1 * c - (1.0 - g) * s)
    f1_dd = 0.3 * (-g2 * c + 2.0 * g1 * s - (1.0 - g) * c)

    m, m1, m2 = t * g, g + t * g1, 2.0 * g1 + t * g2
    h, h1, h2 = 0.08 * np.pi + 0.006 * s, 0.006 * c, -0.006 * s

    f = f1 + m * h
    f_d = f1_d + m1 * h + m * h1
    f_dd = f1_dd + m2 * h + 2.0 * m1 * h1 + m * h2
    return f, f_d, f_dd


def reference_at(t: float, q_r: np.ndarray = IDENTITY,
                 excitation_cutoff: Optional[float] = None) -> ReferenceState:
    """Reference rates at time t.

    With an excitation cutoff t_c the rate is held at f(t_c) for t >= t_c and
    its derivatives are zero from then on.
    """
    if excitation_cutoff is not None and t >= excitation_cutoff:
        f, _, _ = reference_profile(excitation_cutoff)
        return ReferenceState(q_r, f * ONES, np.zeros(3), np.zeros(3))
    f, f_d, f_dd = reference_profile(t)
    return ReferenceState(q_r, f * ONES, f_d * ONES, f_dd * ONES)
