"""
Regressor construction.

    Phi   = Phi1 + Phi2
    Phi1  = k_p L[w] + L[y]
    Phi2  = -S(w) L[w] + L[S(w) Omega] + Lambda L[Q(q_e) w]

Phi2hat row i is row i of Phi2 evaluated at omega_hat with component i
replaced by omega_i; Psi = Phi2hat - Phi2.
"""
from dataclasses import dataclass

import numpy as np

from attmath.inertia import lmap, lmap_batch
from attmath.quaternion import kinematics_matrix, skew, skew_batch
from errstate.barrier import gibbs_vector
from errstate.tracking import TrackingError
from plant.reference import ReferenceState

ROWS = np.arange(3)


@dataclass
class RegressorBundle:
    Phi: np.ndarray
    Phi1: np.ndarray
    Phi2: np.ndarray
    Phi2hat: np.ndarray
    Psi: np.ndarray
    y: np.ndarray
    ybar: np.ndarray
    Omega: np.ndarray
    Omega_bar: np.ndarray
    Q: np.ndarray
    xi: np.ndarray


def reference_in_body(err: TrackingError, ref: ReferenceState):
    """Omega = C omega_r and Omega_bar = C omega_r_dot."""
    return err.C @ ref.omega_r, err.C @ ref.omega_r_dot


def build_y(err: TrackingError, ref: ReferenceState, k_p: float) -> np.ndarray:
    Omega, Omega_bar = reference_in_body(err, ref)
    lam = err.lambda_slope
    Q = kinematics_matrix(err.q_e)
    return -Omega_bar - k_p * Omega + k_p * lam * err.q_ev + gibbs_vector(err.q_e) - lam * Q @ Omega


def build_ybar(y: np.ndarray, omega: np.ndarray, err: TrackingError, ref: ReferenceState,
               k_p: float) -> np.ndarray:
    Omega = err.C @ ref.omega_r
    Q = kinematics_matrix(err.q_e)
    return y + k_p * omega + np.cross(omega, Omega) + err.lambda_slope * Q @ omega


def phi2_batch(W: np.ndarray, Omega: np.ndarray, Q: np.ndarray, lam: float) -> np.ndarray:
    """Phi2 evaluated at each row of W (k, 3); returns (k, 3, 6)."""
    return (-skew_batch(W) @ lmap_batch(W)
            + lmap_batch(np.cross(W, Omega))
            + lam * lmap_batch(W @ Q.T))


def phi2_directional_batch(W: np.ndarray, W_dot: np.ndarray, Omega: np.ndarray, Omega_dot: np.ndarray,
                           Q: np.ndarray, Q_dot: np.ndarray, lam: float) -> np.ndarray:
    """Time derivative of Phi2 along (W_dot, Omega_dot, Q_dot), batched like phi2_batch."""
    return (-(skew_batch(W_dot) @ lmap_batch(W) + skew_batch(W) @ lmap_batch(W_dot))
            + lmap_batch(np.cross(W_dot, Omega) + np.cross(W, Omega_dot))
            + lam * lmap_batch(W @ Q_dot.T + W_dot @ Q.T))


def phi2(omega: np.ndarray, Omega: np.ndarray, Q: np.ndarray, lam: float) -> np.ndarray:
    return phi2_batch(omega[None, :], Omega, Q, lam)[0]


def substitution_points(omega: np.ndarray, omega_hat: np.ndarray, fill=None) -> np.ndarray:
    """Row i is omega_hat with component i replaced by omega_i (or by `fill`)."""
    points = np.tile(omega_hat, (3, 1))
    points[ROWS, ROWS] = omega if fill is None else fill
    return points


def build_regressors(omega: np.ndarray, err: TrackingError, ref: ReferenceState,
                     omega_hat: np.ndarray, k_p: float) -> RegressorBundle:
    lam = err.lambda_slope
    Omega, Omega_bar = reference_in_body(err, ref)
    Q = kinematics_matrix(err.q_e)
    xi = gibbs_vector(err.q_e)
    y = build_y(err, ref, k_p)
    ybar = build_ybar(y, omega, err, ref, k_p)

    Phi1 = k_p * lmap(omega) + lmap(y)
    stacked = phi2_batch(np.vstack([omega, substitution_points(omega, omega_hat)]), Omega, Q, lam)
    Phi2 = stacked[0]
    Phi2hat = stacked[1 + ROWS, ROWS]
    return RegressorBundle(
        Phi=Phi1 + Phi2, Phi1=Phi1, Phi2=Phi2, Phi2hat=Phi2hat, Psi=Phi2hat - Phi2,
        y=y, ybar=ybar, Omega=Omega, Omega_bar=Omega_bar, Q=Q, xi=xi,
    )


def direct_phi(omega: np.ndarray, err: TrackingError, ref: ReferenceState, k_p: float) -> np.ndarray:
    """Phi written in one piece: -S(w) L[w] + L[S(w) Omega - Omega_bar + k_p s + xi + Lambda q_ev']."""
    Omega, Omega_bar = reference_in_body(err, ref)
    q_ev_dot = kinematics_matrix(err.q_e) @ err.omega_e
    inner = (np.cross(omega, Omega) - Omega_bar + k_p * err.s + gibbs_vector(err.q_e)
             + err.lambda_slope * q_ev_dot)
    return -skew(omega) @ lmap(omega) + lmap(inner)
