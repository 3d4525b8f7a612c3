"""
Error hierarchy for simulation, validation and verification failures.

Each class carries a stable process exit code; management commands turn
these into CommandError(returncode=...).
"""
from typing import Dict


class SimulationError(Exception):
    """Base exception for attitude-lab errors"""
    exit_code = 1
    default_code = 'simulation_error'

    def __init__(self, message: str, error_code: str = None, details: Dict = None):
        self.message = message
        self.error_code = error_code or self.default_code
        self.details = details or {}
        super().__init__(self.message)


class ScenarioConfigError(SimulationError):
    """Malformed or invalid scenario configuration"""
    exit_code = 1
    default_code = 'config_error'


class PermissibleSetError(ScenarioConfigError):
    """Initial error quaternion outside the permissible set (q_e4(0) ~ 0)"""
    default_code = 'outside_permissible_set'


class SingularInertiaError(ScenarioConfigError):
    """Inertia parameters do not reconstruct a well-conditioned positive definite J"""
    default_code = 'singular_inertia'


class BarrierBlowupError(SimulationError):
    """Barrier function or Gibbs vector evaluated at q_e4 ~ 0"""
    exit_code = 2
    default_code = 'barrier_blowup'


class UnwindingGuardBreach(SimulationError):
    """|q_e4| fell below the unwinding guard during a run"""
    exit_code = 2
    default_code = 'unwinding_guard_breach'


class NonFiniteStateError(SimulationError):
    """A step produced NaN or Inf in the augmented state"""
    exit_code = 3
    default_code = 'non_finite_state'


class VerificationFailed(SimulationError):
    """One or more verification checks failed"""
    exit_code = 4
    default_code = 'verification_failed'
