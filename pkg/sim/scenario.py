"""
Scenario definition: everything a single closed-loop run depends on.
"""
import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from attmath.quaternion import IDENTITY
from controller.gains import VARIANTS, ControllerGains
from plant.perturbations import NoiseConfig
from utils.constants import Q0_VECTOR, THETA_ESTIMATE_0, THETA_TRUE
from utils.exceptions import ScenarioConfigError

ZERO6 = (0.0,) * 6


def initial_attitude(case: int) -> Tuple[float, ...]:
    """Case 1: [q0, +sqrt(1 - q0.q0)].  Case 2: [-q0, -sqrt(1 - q0.q0)]."""
    q0 = np.array(Q0_VECTOR)
    q4 = np.sqrt(1.0 - q0 @ q0)
    if case == 1:
        return tuple(np.append(q0, q4).tolist())
    if case == 2:
        return tuple(np.append(-q0, -q4).tolist())
    raise ScenarioConfigError(f"Unknown initial case {case}; expected 1 or 2")


@dataclass(frozen=True)
class Scenario:
    label: str
    duration: float = 40.0
    step: float = 0.01
    q0: Tuple[float, ...] = field(default_factory=lambda: initial_attitude(1))
    omega0: Tuple[float, ...] = (0.0, 0.0, 0.0)
    q_r0: Tuple[float, ...] = tuple(IDENTITY.tolist())
    gains: ControllerGains = field(default_factory=ControllerGains)
    theta_true: Tuple[float, ...] = tuple(THETA_TRUE)
    theta_estimate0: Tuple[float, ...] = tuple(THETA_ESTIMATE_0)
    chi0: Tuple[float, ...] = ZERO6
    noise: Optional[NoiseConfig] = None
    disturbance: bool = False
    variant: str = 'exponential'
    excitation_cutoff: Optional[float] = None
    # simulation only: omega_hat held equal to omega, using the plant acceleration
    pin_omega_hat: bool = False
    seed: int = 0
    unwinding_guard: float = 1e-6
    description: str = ''

    def __post_init__(self):
        if self.step <= 0:
            raise ScenarioConfigError(f"step must be positive, got {self.step}")
        if self.duration < 0 or 0 < self.duration < self.step:
            raise ScenarioConfigError(
                f"duration must be 0 or at least one step ({self.step}), got {self.duration}"
            )
        if self.variant not in VARIANTS:
            raise ScenarioConfigError(f"Unknown estimator variant '{self.variant}'; expected one of {VARIANTS}")
        for name, size in (('q0', 4), ('omega0', 3), ('q_r0', 4), ('theta_true', 6),
                           ('theta_estimate0', 6), ('chi0', 6)):
            if len(getattr(self, name)) != size:
                raise ScenarioConfigError(f"'{name}' must have {size} entries, got {len(getattr(self, name))}")
        for name in ('q0', 'q_r0'):
            if np.linalg.norm(getattr(self, name)) < 1e-12:
                raise ScenarioConfigError(f"'{name}' must be a non-zero quaternion")

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.step))

    @property
    def is_baseline(self) -> bool:
        return self.variant == 'ce_baseline'

    def to_dict(self) -> dict:
        """Fully resolved parameter set, in the same sections as a scenario file."""
        gains = self.gains
        return {
            'label': self.label,
            'description': self.description,
            'duration': self.duration,
            'step': self.step,
            'seed': self.seed,
            'initial': {
                'q': list(self.q0),
                'omega': list(self.omega0),
                'theta_estimate': list(self.theta_estimate0),
                'chi0': list(self.chi0),
            },
            'plant': {
                'theta_true': list(self.theta_true),
                'disturbance': self.disturbance,
            },
            'noise': None if self.noise is None else {
                'cone_half_angle': self.noise.cone_half_angle,
                'gyro_std': self.noise.gyro_std,
            },
            'reference': {
                'q_r0': list(self.q_r0),
                'excitation_cutoff': self.excitation_cutoff,
            },
            'controller': {
                'alpha': gains.alpha, 'beta': gains.beta, 'kappa': gains.kappa,
                'f_m': gains.f_m, 'gamma': gains.gamma, 'lambda': gains.lam,
                'gamma_ce': gains.gamma_ce, 'unwinding_guard': self.unwinding_guard,
            },
            'drem': {'a': gains.a, 'b': gains.b, 'k_I': gains.k_I, 'k_N': gains.k_N},
            'estimator': {
                'variant': self.variant, 'pin_omega_hat': self.pin_omega_hat,
                'lambda1': gains.lambda1, 'lambda2': gains.lambda2,
                'iota1': gains.iota1, 'iota2': gains.iota2,
            },
        }

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()
