"""
Lyapunov function reconstructed along a logged trajectory.

    V = V_q + 1/2 s^T s + 1/2 w~^T w~ + eta V_z,   V_z = z^T z / (2 gamma),   eta = 2 (1/kappa + rho)

with w~ = omega_hat - omega. V_q is the barrier evaluated with unit weight;
the configured alpha is carried along for reporting only.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from attmath.inertia import InertiaParams
from controller.gains import ControllerGains
from diagnostics.scaling import ScalingDiagnostics, scaling_series
from errstate.barrier import quadratic_bounds


@dataclass
class LyapunovSeries:
    t: np.ndarray
    V_q: np.ndarray
    V_s: np.ndarray
    V_w: np.ndarray
    V_z: np.ndarray
    V_total: np.ndarray
    Z_sq: np.ndarray
    eta: float
    alpha: float
    barrier_weight: float
    scaling: ScalingDiagnostics

    def non_increase_violation(self) -> float:
        """Largest step-to-step increase of V (0 when V never increases)."""
        if self.V_total.size < 2:
            return 0.0
        return float(max(0.0, np.diff(self.V_total).max()))


def lyapunov_series(log, theta_true: np.ndarray, gains: ControllerGains, rho: float = 1.0,
                    r0: float = 0.1, barrier_weight: float = 1.0) -> LyapunovSeries:
    theta_true = np.asarray(theta_true, dtype=float)
    J_m = InertiaParams(theta_true).min_eigenvalue
    theta_err = log['estimate'] - theta_true
    scaling = scaling_series(log.t[:len(log)], log['psi_sq'], theta_err, gains.gamma, gains.f_m,
                             J_m, r0=r0, label=log.scenario.label)

    q_e = log['q_e']
    s = log['s']
    omega_tilde = log['omega_hat'] - log['omega']
    eta = 2.0 * (1.0 / gains.kappa + rho)

    V_q = -barrier_weight * np.log(q_e[:, 3] ** 2)
    V_s = 0.5 * np.sum(s ** 2, axis=1)
    V_w = 0.5 * np.sum(omega_tilde ** 2, axis=1)
    z_sq = np.sum(scaling.z ** 2, axis=1)
    V_z = z_sq / (2.0 * gains.gamma)
    Z_sq = np.sum(q_e[:, :3] ** 2, axis=1) + 2.0 * V_s + 2.0 * V_w + z_sq

    return LyapunovSeries(
        t=log.t[:len(log)], V_q=V_q, V_s=V_s, V_w=V_w, V_z=V_z, V_total=V_q + V_s + V_w + eta * V_z,
        Z_sq=Z_sq, eta=eta, alpha=gains.alpha, barrier_weight=barrier_weight, scaling=scaling,
    )


def sandwich_constants(series: LyapunovSeries, gamma: float, delta: float) -> Tuple[float, float]:
    """(lower, upper) with lower ||Z||^2 <= V <= upper ||Z||^2 while |q_e4| >= delta."""
    a_lo, a_hi = quadratic_bounds(delta, series.barrier_weight)
    scaled = series.eta / (2.0 * gamma)
    return min(a_lo, 0.5, scaled), max(a_hi, 0.5, scaled)


def sandwich_violation(series: LyapunovSeries, gamma: float, q_e4: np.ndarray) -> float:
    """Worst relative violation of the quadratic sandwich (0 when it holds everywhere)."""
    delta = float(np.min(np.abs(q_e4)))
    delta = min(delta, 1.0 - 1e-12)
    lower, upper = sandwich_constants(series, gamma, delta)
    scale = np.maximum(series.Z_sq, 1e-300)
    below = (lower * series.Z_sq - series.V_total) / scale
    above = (series.V_total - upper * series.Z_sq) / scale
    return float(max(0.0, below.max(), above.max()))
