"""
Mixing of the extended regressor M = N theta into scalar equations.

    Y = k_I adj(N) M,   Delta = k_I det(N)

Y is evaluated with Cramer's rule, Y_i = k_I det(N with column i replaced
by M), which stays valid when N is singular.
"""
import logging
from dataclasses import dataclass

import numpy as np

from drem.filters import DremState
from utils.constants import DET_UNDERFLOW_FLOOR

logger = logging.getLogger(__name__)

COLUMNS = np.arange(6)


@dataclass
class ScalarLre:
    Y: np.ndarray
    Delta: float
    Y_N: np.ndarray = None
    Delta_N: float = None


def cramer_stack(N: np.ndarray, M: np.ndarray) -> np.ndarray:
    """(7, 6, 6) stack: N itself followed by N with column i replaced by M."""
    stack = np.broadcast_to(N, (7, 6, 6)).copy()
    stack[1 + COLUMNS, :, COLUMNS] = M
    return stack


def mix(state: DremState, k_I: float) -> ScalarLre:
    dets = np.linalg.det(cramer_stack(state.N, state.M))
    return ScalarLre(Y=k_I * dets[1:], Delta=float(k_I * dets[0]))


def adjugate(N: np.ndarray) -> np.ndarray:
    """Classical adjoint from 5x5 cofactors; adj(N) N = det(N) I."""
    minors = np.empty((6, 6, 5, 5))
    for i in range(6):
        rows = np.delete(N, i, axis=0)
        for j in range(6):
            minors[i, j] = np.delete(rows, j, axis=1)
    signs = (-1.0) ** np.add.outer(COLUMNS, COLUMNS)
    cofactors = signs * np.linalg.det(minors)
    return cofactors.T


def extend(state: DremState, lre: ScalarLre, k_N: float) -> ScalarLre:
    """Y_N = Y + k_N (chi - Xi chi(0)),  Delta_N = Delta + k_N (1 - Xi)."""
    return ScalarLre(
        Y=lre.Y,
        Delta=lre.Delta,
        Y_N=lre.Y + k_N * (state.chi - state.Xi * state.chi0),
        Delta_N=lre.Delta + k_N * (1.0 - state.Xi),
    )


def det_underflows(Delta: float, N: np.ndarray) -> bool:
    """True when a non-zero N has |det N| below DET_UNDERFLOW_FLOOR / k_I.

    Delta = k_I det N, so the test is on Delta itself.
    """
    return abs(Delta) < DET_UNDERFLOW_FLOOR and float(np.trace(N)) > 0.0
