"""
Settling-time bounds for finite- and fixed-time parameter convergence.

    c_k = (2 gamma)^((iota_k + 1)/2) lambda_k hbar^iota_k R_m^(iota_k - 1)

    finite:  T_s + 1/(lambda gamma hbar (1 - iota1)) ln((2 lambda gamma hbar V_z(T_s)^((1 - iota1)/2) + c1) / c1)
    fixed:   T_s + 2/(c1 (1 - iota1)) + 2/(c2 (iota2 - 1))

Both are absolute times. A bound whose gain is zero is None.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from controller.gains import ControllerGains


@dataclass
class SettlingBounds:
    finite: Optional[float]
    fixed: Optional[float]
    c1: float
    c2: float


def power_constant(gamma: float, lam_k: float, iota: float, hbar: float, R_m: float) -> float:
    return (2.0 * gamma) ** ((iota + 1.0) / 2.0) * lam_k * hbar ** iota * R_m ** (iota - 1.0)


def settling_bounds(gains: ControllerGains, hbar: float, V_z_at_Ts: float, R_m: float,
                    T_s: float = 0.0) -> SettlingBounds:
    if hbar <= 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    c1 = power_constant(gains.gamma, gains.lambda1, gains.iota1, hbar, R_m)
    c2 = power_constant(gains.gamma, gains.lambda2, gains.iota2, hbar, R_m)

    finite = None
    if c1 > 0:
        power = V_z_at_Ts ** ((1.0 - gains.iota1) / 2.0)
        rate = gains.lam * gains.gamma * hbar
        if rate > 0:
            finite = T_s + np.log1p(2.0 * rate * power / c1) / (rate * (1.0 - gains.iota1))
        else:
            finite = T_s + 2.0 * power / (c1 * (1.0 - gains.iota1))
        finite = float(finite)

    fixed = None
    if c1 > 0 and c2 > 0:
        fixed = float(T_s + 2.0 / (c1 * (1.0 - gains.iota1)) + 2.0 / (c2 * (gains.iota2 - 1.0)))
    return SettlingBounds(finite=finite, fixed=fixed, c1=c1, c2=c2)


def convergence_time(t: np.ndarray, theta_err: np.ndarray, threshold: float = 1e-3) -> Optional[float]:
    """First time after which ||theta_err|| stays below `threshold`."""
    norms = np.linalg.norm(theta_err, axis=1)
    above = np.flatnonzero(norms >= threshold)
    if above.size == 0:
        return float(t[0])
    if above[-1] == norms.size - 1:
        return None
    return float(t[above[-1] + 1])
