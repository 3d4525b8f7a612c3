"""
Augmented closed-loop state: one flat vector of 78 scalars.

    q(4) omega(3) q_r(4) omega_hat(3) theta_hat(6) omega_f(3) W_f(18)
    u_f(3) M(6) N(21, upper triangle) chi(6) Xi(1)
"""
from dataclasses import dataclass

import numpy as np

from attmath.quaternion import normalize

TRIU = np.triu_indices(6)
# SYMMETRIC[i, j] is the packed position of N[min(i, j), max(i, j)]
SYMMETRIC = np.empty((6, 6), dtype=int)
SYMMETRIC[TRIU] = np.arange(len(TRIU[0]))
SYMMETRIC[TRIU[1], TRIU[0]] = SYMMETRIC[TRIU]

LAYOUT = [
    ('q', 4), ('omega', 3), ('q_r', 4), ('omega_hat', 3), ('theta_hat', 6),
    ('omega_f', 3), ('W_f', 18), ('u_f', 3), ('M', 6), ('N', 21), ('chi', 6), ('Xi', 1),
]

SLICES = {}
_offset = 0
for _name, _size in LAYOUT:
    SLICES[_name] = slice(_offset, _offset + _size)
    _offset += _size
STATE_SIZE = _offset

# chi and Xi: the linear LTV filter advanced in closed form
RELAXED = np.arange(SLICES['chi'].start, SLICES['Xi'].stop)
XI_FLOOR = np.finfo(float).tiny


def pack_symmetric(N: np.ndarray) -> np.ndarray:
    return N[TRIU]


def unpack_symmetric(packed: np.ndarray) -> np.ndarray:
    return packed[SYMMETRIC]


@dataclass
class AugmentedState:
    q: np.ndarray
    omega: np.ndarray
    q_r: np.ndarray
    omega_hat: np.ndarray
    theta_hat: np.ndarray
    omega_f: np.ndarray
    W_f: np.ndarray
    u_f: np.ndarray
    M: np.ndarray
    N: np.ndarray
    chi: np.ndarray
    Xi: float

    def pack(self) -> np.ndarray:
        return np.concatenate([
            self.q, self.omega, self.q_r, self.omega_hat, self.theta_hat,
            self.omega_f, np.ravel(self.W_f), self.u_f, self.M,
            pack_symmetric(self.N), self.chi, [self.Xi],
        ])

    @classmethod
    def unpack(cls, x: np.ndarray) -> 'AugmentedState':
        s = SLICES
        return cls(
            q=x[s['q']], omega=x[s['omega']], q_r=x[s['q_r']],
            omega_hat=x[s['omega_hat']], theta_hat=x[s['theta_hat']],
            omega_f=x[s['omega_f']], W_f=x[s['W_f']].reshape(3, 6), u_f=x[s['u_f']],
            M=x[s['M']], N=unpack_symmetric(x[s['N']]), chi=x[s['chi']], Xi=float(x[s['Xi']][0]),
        )


def project_state(x: np.ndarray) -> np.ndarray:
    """Post-step projection: both quaternions back onto the unit sphere, Xi kept positive."""
    x[SLICES['q']] = normalize(x[SLICES['q']])
    x[SLICES['q_r']] = normalize(x[SLICES['q_r']])
    x[SLICES['Xi']] = np.maximum(x[SLICES['Xi']], XI_FLOOR)
    return x
