"""
Inertia parameterization and the linear regression operator L[x].
"""
from dataclasses import dataclass, field

import numpy as np

from utils.constants import INERTIA_COND_MAX
from utils.exceptions import SingularInertiaError


def lmap(x: np.ndarray) -> np.ndarray:
    """Regression operator with lmap(x) @ theta == J @ x."""
    return np.array([
        [x[0], 0.0, 0.0, 0.0, x[2], x[1]],
        [0.0, x[1], 0.0, x[2], 0.0, x[0]],
        [0.0, 0.0, x[2], x[1], x[0], 0.0],
    ])


def lmap_batch(X: np.ndarray) -> np.ndarray:
    """lmap() applied to every row of a (k, 3) array, returning (k, 3, 6)."""
    out = np.zeros((X.shape[0], 3, 6))
    out[:, 0, 0] = X[:, 0]
    out[:, 0, 4] = X[:, 2]
    out[:, 0, 5] = X[:, 1]
    out[:, 1, 1] = X[:, 1]
    out[:, 1, 3] = X[:, 2]
    out[:, 1, 5] = X[:, 0]
    out[:, 2, 2] = X[:, 2]
    out[:, 2, 3] = X[:, 1]
    out[:, 2, 4] = X[:, 0]
    return out


def reconstruct(theta: np.ndarray) -> np.ndarray:
    """Symmetric J from theta = [J11, J22, J33, J23, J13, J12]."""
    t = theta
    return np.array([
        [t[0], t[5], t[4]],
        [t[5], t[1], t[3]],
        [t[4], t[3], t[2]],
    ])


def omega_bar(omega: np.ndarray) -> np.ndarray:
    """[w1^2/2, w2^2/2, w3^2/2, w2 w3, w1 w3, w1 w2]; its Jacobian is lmap(omega)^T."""
    w = omega
    return np.array([
        0.5 * w[0] * w[0], 0.5 * w[1] * w[1], 0.5 * w[2] * w[2],
        w[1] * w[2], w[0] * w[2], w[0] * w[1],
    ])


@dataclass(frozen=True)
class InertiaParams:
    theta: np.ndarray
    matrix: np.ndarray = field(init=False, repr=False)
    inverse: np.ndarray = field(init=False, repr=False)
    min_eigenvalue: float = field(init=False)

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.shape != (6,):
            raise SingularInertiaError(f"Inertia parameters must have 6 entries, got {theta.shape}")
        J = reconstruct(theta)
        eig = np.linalg.eigvalsh(J)
        if eig[0] <= 0.0:
            raise SingularInertiaError(
                f"Inertia matrix is not positive definite (min eigenvalue {eig[0]:.3e})",
                details={'theta': theta.tolist()},
            )
        if eig[-1] / eig[0] > INERTIA_COND_MAX:
            raise SingularInertiaError(
                f"Inertia matrix is numerically singular (condition number {eig[-1] / eig[0]:.3e})",
                details={'theta': theta.tolist()},
            )
        object.__setattr__(self, 'theta', theta)
        object.__setattr__(self, 'matrix', J)
        object.__setattr__(self, 'inverse', np.linalg.inv(J))
        object.__setattr__(self, 'min_eigenvalue', float(eig[0]))
