"""
First-order filters, Kreisselmeier extension and the LTV regressor extension.

    w_f' = w - a w_f           W_f' = W - a W_f        u_f' = u - a u_f
    M'   = -b M + W_a^T u_f    N'   = -b N + W_a^T W_a
    chi' = Delta (Y - Delta chi)                       Xi'  = -Delta^2 Xi

with W = -S(w) L[w] and W_a = L[w_f'] - W_f, so that u_f = W_a theta.
"""
from dataclasses import dataclass, field

import numpy as np

from attmath.inertia import lmap


@dataclass
class DremState:
    omega_f: np.ndarray
    W_f: np.ndarray
    u_f: np.ndarray
    M: np.ndarray
    N: np.ndarray
    chi: np.ndarray
    Xi: float
    chi0: np.ndarray = field(default=None, repr=False)

    @classmethod
    def initial(cls, omega0: np.ndarray, a: float, chi0: np.ndarray = None) -> 'DremState':
        chi0 = np.zeros(6) if chi0 is None else np.asarray(chi0, dtype=float)
        return cls(
            omega_f=np.asarray(omega0, dtype=float) / a,
            W_f=np.zeros((3, 6)),
            u_f=np.zeros(3),
            M=np.zeros(6),
            N=np.zeros((6, 6)),
            chi=chi0.copy(),
            Xi=1.0,
            chi0=chi0.copy(),
        )


def gyroscopic_regressor(omega: np.ndarray) -> np.ndarray:
    """W(omega) = -S(omega) L[omega], so that W theta = -omega x J omega."""
    L = lmap(omega)
    return -np.cross(omega, L.T).T


def filtered_regressor(state: DremState, omega_f_dot: np.ndarray) -> np.ndarray:
    """W_a = L[w_f'] - W_f."""
    return lmap(omega_f_dot) - state.W_f


def drem_derivative(state: DremState, omega: np.ndarray, u: np.ndarray, a: float, b: float,
                    Delta: float, Y: np.ndarray) -> DremState:
    omega_f_dot = omega - a * state.omega_f
    W_a = filtered_regressor(state, omega_f_dot)
    return DremState(
        omega_f=omega_f_dot,
        W_f=gyroscopic_regressor(omega) - a * state.W_f,
        u_f=u - a * state.u_f,
        M=-b * state.M + W_a.T @ state.u_f,
        N=-b * state.N + W_a.T @ W_a,
        chi=Delta * (Y - Delta * state.chi),
        Xi=-Delta * Delta * state.Xi,
    )
