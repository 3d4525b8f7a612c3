"""
Composite I&I adaptive law with DREM learning.

    u          = -Phi (theta_hat + zeta),        zeta = gamma mu
    theta_hat' = -gamma [mu_bar' - (Phi + Psi)^T ybar] - gamma (lambda eps + Theta)
    eps        = Delta_N (theta_hat + zeta) - Y_N
    Theta      = lambda1 |eps|^iota1 sgn(eps) + lambda2 |eps|^iota2 sgn(eps)

The certainty-equivalence baseline shares the regressor:
    u = -Phi theta_ce,   theta_ce' = gamma_ce Phi^T s
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from controller.gains import ControllerGains
from drem.mixing import ScalarLre
from errstate.tracking import TrackingError
from regressor.regressors import RegressorBundle


@dataclass
class EstimatorState:
    theta_hat: np.ndarray
    zeta: np.ndarray

    @property
    def estimate(self) -> np.ndarray:
        return self.theta_hat + self.zeta


def control_torque(bundle: RegressorBundle, est: EstimatorState) -> np.ndarray:
    return -bundle.Phi @ est.estimate


def norm_sign(x: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(x)
    if norm == 0.0:
        return np.zeros_like(x)
    return x / norm


def power_term(eps: np.ndarray, gains: ControllerGains) -> np.ndarray:
    norm = np.linalg.norm(eps)
    if norm == 0.0:
        return np.zeros_like(eps)
    scale = gains.lambda1 * norm ** gains.iota1 + gains.lambda2 * norm ** gains.iota2
    return scale * eps / norm


def prediction_error(est: EstimatorState, lre: ScalarLre) -> np.ndarray:
    return lre.Delta_N * est.estimate - lre.Y_N


def update_terms(bundle: RegressorBundle, mu_bar_dot: np.ndarray, eps: np.ndarray,
                 gains: ControllerGains, power: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(I&I direction, DREM direction) of the estimator update."""
    ii = -gains.gamma * (mu_bar_dot - (bundle.Phi + bundle.Psi).T @ bundle.ybar)
    learning = -gains.gamma * (gains.lam * eps + power)
    return ii, learning


def theta_hat_derivative(bundle: RegressorBundle, mu_bar_dot: np.ndarray, eps: np.ndarray,
                         gains: ControllerGains, power: np.ndarray) -> np.ndarray:
    ii, learning = update_terms(bundle, mu_bar_dot, eps, gains, power)
    return ii + learning


def ce_baseline_torque(bundle: RegressorBundle, theta_hat_ce: np.ndarray) -> np.ndarray:
    return -bundle.Phi @ theta_hat_ce


def ce_baseline_derivative(bundle: RegressorBundle, err: TrackingError, gains: ControllerGains) -> np.ndarray:
    return gains.gamma_ce * bundle.Phi.T @ err.s
