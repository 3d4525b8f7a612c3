"""
Solution of the regressor PDE dmu/domega = (Phi + Psi)^T.

mu1 integrates Phi1 exactly. mu2 integrates the reconfigured rows of Phi2:

    mu2 = sum_i  int_0^{w_i} row_i Phi2(w^(i)(tau)) dtau

where w^(i)(tau) is omega_hat with component i set to tau. Row i of Phi2 is
affine in its own component (the e_i x J e_i term vanishes), so the
trapezoid rule over the two end points is exact.
"""
import numpy as np

from attmath.inertia import lmap, omega_bar
from attmath.quaternion import kinematics_matrix, skew
from errstate.tracking import TrackingError
from plant.reference import ReferenceState
from regressor.regressors import (
    ROWS, RegressorBundle, phi2, phi2_batch, phi2_directional_batch, substitution_points,
)

ZERO3 = np.zeros(3)


def mu1(omega: np.ndarray, y: np.ndarray, k_p: float) -> np.ndarray:
    return lmap(y).T @ omega + k_p * omega_bar(omega)


def _endpoints(omega, omega_hat):
    return np.vstack([substitution_points(omega, omega_hat, fill=ZERO3),
                      substitution_points(omega, omega_hat)])


def mu2(omega: np.ndarray, omega_hat: np.ndarray, err: TrackingError, ref: ReferenceState) -> np.ndarray:
    Omega = err.C @ ref.omega_r
    Q = kinematics_matrix(err.q_e)
    rows = phi2_batch(_endpoints(omega, omega_hat), Omega, Q, err.lambda_slope)
    lower, upper = rows[ROWS, ROWS], rows[3 + ROWS, ROWS]
    return 0.5 * (lower + upper).T @ omega


def mu_total(omega: np.ndarray, omega_hat: np.ndarray, err: TrackingError, ref: ReferenceState,
             y: np.ndarray, k_p: float) -> np.ndarray:
    return mu1(omega, y, k_p) + mu2(omega, omega_hat, err, ref)


def mu_from_bundle(omega: np.ndarray, omega_hat: np.ndarray, bundle: RegressorBundle,
                   lam: float, k_p: float) -> np.ndarray:
    """mu_total reusing a bundle built at the same (omega, omega_hat).

    The upper end points of mu2 are the rows of bundle.Phi2hat.
    """
    points = substitution_points(omega, omega_hat, fill=ZERO3)
    lower = phi2_batch(points, bundle.Omega, bundle.Q, lam)[ROWS, ROWS]
    return mu1(omega, bundle.y, k_p) + 0.5 * (lower + bundle.Phi2hat).T @ omega


def fd_jacobian(fn, omega: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a 6-vector function of omega, shape (6, 3)."""
    jac = np.zeros((6, 3))
    for i in range(3):
        step = np.zeros(3)
        step[i] = h
        jac[:, i] = (fn(omega + step) - fn(omega - step)) / (2.0 * h)
    return jac


def mu_jacobian_identity_check(bundle: RegressorBundle, omega: np.ndarray, omega_hat: np.ndarray,
                               err: TrackingError, ref: ReferenceState, k_p: float,
                               h: float = 1e-6) -> float:
    """Max |FD dmu/domega - (Phi + Psi)^T|."""
    jac = fd_jacobian(lambda w: mu_total(w, omega_hat, err, ref, bundle.y, k_p), omega, h)
    return float(np.max(np.abs(jac - (bundle.Phi + bundle.Psi).T)))


def integrability_asymmetry(omega: np.ndarray, err: TrackingError, ref: ReferenceState,
                            h: float = 1e-5) -> float:
    """Max over i != j of |d row_i Phi2 / d w_j - d row_j Phi2 / d w_i|.

    A non-zero value shows Phi2^T is not the Jacobian of any function of omega.
    """
    Omega = err.C @ ref.omega_r
    Q = kinematics_matrix(err.q_e)
    partials = []
    for j in range(3):
        step = np.zeros(3)
        step[j] = h
        partials.append((phi2(omega + step, Omega, Q, err.lambda_slope)
                         - phi2(omega - step, Omega, Q, err.lambda_slope)) / (2.0 * h))
    worst = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            worst = max(worst, float(np.max(np.abs(partials[j][i] - partials[i][j]))))
    return worst


def omega_hat_derivative(omega_hat: np.ndarray, ybar: np.ndarray, omega: np.ndarray, k_f: float) -> np.ndarray:
    return -ybar - k_f * (omega_hat - omega)


def error_rates(err: TrackingError, bundle: RegressorBundle, ref: ReferenceState):
    """Rates of q_ev, xi, Omega, Omega_bar and Q along the current error trajectory."""
    q_ev, q_e4 = err.q_ev, err.q_e4
    q_ev_dot = bundle.Q @ err.omega_e
    q_e4_dot = -0.5 * q_ev @ err.omega_e
    xi_dot = (q_ev_dot * q_e4 - q_ev * q_e4_dot) / (q_e4 * q_e4)
    S_e = skew(err.omega_e)
    Omega_dot = -S_e @ bundle.Omega + err.C @ ref.omega_r_dot
    Omega_bar_dot = -S_e @ bundle.Omega_bar + err.C @ ref.omega_r_ddot
    Q_dot = 0.5 * (skew(q_ev_dot) + q_e4_dot * np.eye(3))
    return q_ev_dot, xi_dot, Omega_dot, Omega_bar_dot, Q_dot


def mu_bar_dot(omega: np.ndarray, omega_hat: np.ndarray, omega_hat_dot: np.ndarray,
               err: TrackingError, ref: ReferenceState, bundle: RegressorBundle, k_p: float) -> np.ndarray:
    """Partial time derivative of mu with omega held fixed.

    Differentiates through y, omega_hat, q_e and Omega using measurable rates
    only; the body acceleration never enters.
    """
    lam = err.lambda_slope
    q_ev_dot, xi_dot, Omega_dot, Omega_bar_dot, Q_dot = error_rates(err, bundle, ref)
    y_dot = (-Omega_bar_dot - k_p * Omega_dot + k_p * lam * q_ev_dot + xi_dot
             - lam * (Q_dot @ bundle.Omega + bundle.Q @ Omega_dot))

    points = _endpoints(omega, omega_hat)
    rates = substitution_points(omega_hat_dot, omega_hat_dot, fill=ZERO3)
    rows = phi2_directional_batch(points, np.vstack([rates, rates]), bundle.Omega, Omega_dot,
                                  bundle.Q, Q_dot, lam)
    lower, upper = rows[ROWS, ROWS], rows[3 + ROWS, ROWS]
    return lmap(y_dot).T @ omega + 0.5 * (lower + upper).T @ omega
