"""
Dynamic scaling used by the stability analysis.

    f(r) = f_m tanh(r) + 1
    r'   = gamma f(r) sqrt(ln f(r)) / f'(r) * ||Psi||^2
    R    = sqrt(J_m) exp(-1 / (2 J_m^2)) exp(sqrt(ln f(r)) / J_m),   z = theta_err / R

Along r' the quantity sqrt(ln f(r)) grows at exactly gamma/2 ||Psi||^2, so it
is obtained by quadrature of the logged ||Psi||^2. r escapes to infinity once
sqrt(ln f) reaches sqrt(ln(f_m + 1)); from then on the scaling is saturated.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

logger = logging.getLogger(__name__)


def scaling_f(r, f_m: float):
    return f_m * np.tanh(r) + 1.0


def scaling_derivative(r: float, Psi: np.ndarray, gamma: float, f_m: float) -> float:
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    f = scaling_f(r, f_m)
    df = f_m / np.cosh(r) ** 2
    return gamma * f * np.sqrt(np.log(f)) / df * float(np.sum(np.asarray(Psi) ** 2))


def scaling_R(sqrt_ln_f, J_m: float):
    return np.sqrt(J_m) * np.exp(-1.0 / (2.0 * J_m ** 2)) * np.exp(np.asarray(sqrt_ln_f) / J_m)


def R_supremum(J_m: float, f_m: float) -> float:
    return float(scaling_R(np.sqrt(np.log(f_m + 1.0)), J_m))


@dataclass
class ScalingDiagnostics:
    r: np.ndarray
    R: np.ndarray
    f_r: np.ndarray
    z: np.ndarray
    saturated: bool = False
    saturation_time: Optional[float] = None


def scaling_series(t: np.ndarray, psi_sq: np.ndarray, theta_err: np.ndarray, gamma: float,
                   f_m: float, J_m: float, r0: float = 0.1, label: str = '') -> ScalingDiagnostics:
    if r0 <= 0:
        raise ValueError(f"r(0) must be positive, got {r0}")
    ceiling = np.sqrt(np.log(f_m + 1.0))
    start = np.sqrt(np.log(scaling_f(r0, f_m)))
    if t.size > 1:
        growth = 0.5 * gamma * cumulative_trapezoid(psi_sq, t, initial=0.0)
    else:
        growth = np.zeros_like(t)
    sqrt_ln_f = start + growth

    saturated_at = np.flatnonzero(sqrt_ln_f >= ceiling)
    saturation_time = None
    if saturated_at.size:
        saturation_time = float(t[saturated_at[0]])
        logger.warning(
            f"Scaling diagnostic saturated in '{label}' at t={saturation_time:.3f}: "
            "r escaped, R held at its supremum"
        )
    sqrt_ln_f = np.minimum(sqrt_ln_f, ceiling)

    f_r = np.exp(sqrt_ln_f ** 2)
    with np.errstate(divide='ignore'):
        r = np.where(sqrt_ln_f >= ceiling, np.inf, np.arctanh(np.clip((f_r - 1.0) / f_m, 0.0, 1.0)))
    R = scaling_R(sqrt_ln_f, J_m)
    return ScalingDiagnostics(
        r=r, R=R, f_r=f_r, z=theta_err / R[:, None],
        saturated=saturation_time is not None, saturation_time=saturation_time,
    )
