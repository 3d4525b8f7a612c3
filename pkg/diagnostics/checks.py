"""
Verification suite: identity and bound checks run by `manage.py verify`.

Every check returns a CheckResult with the largest deviation observed and
the tolerance it was held to.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from attmath.quaternion import random_unit_quaternion
from drem.mixing import adjugate
from drem.monitor import DEFAULT_PE_THRESHOLD, pe_floor_monitor
from errstate.barrier import log_barrier_gap, quadratic_bounds
from errstate.tracking import make_tracking_error
from plant.dynamics import BodyState
from plant.reference import reference_at
from regressor import pde
from regressor.regressors import build_regressors, direct_phi
from sim.runner import TrajectoryLog, run_scenario
from sim.scenario import Scenario
from utils.exceptions import SimulationError

logger = logging.getLogger(__name__)

K_P = 1.5


@dataclass
class CheckResult:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    detail: str = ''


def _result(name: str, deviation: float, tolerance: float, detail: str = '', *, above: bool = False) -> CheckResult:
    passed = deviation > tolerance if above else deviation <= tolerance
    return CheckResult(name, bool(passed), float(deviation), float(tolerance), detail)


def random_signals(rng: np.random.Generator):
    t = rng.uniform(0.0, 40.0)
    ref = reference_at(t, q_r=random_unit_quaternion(rng))
    q = random_unit_quaternion(rng)
    omega = rng.uniform(-1.0, 1.0, 3)
    omega_hat = omega + rng.uniform(-0.3, 0.3, 3)
    lam = 0.1 if rng.random() < 0.5 else -0.1
    return omega, omega_hat, make_tracking_error(BodyState(q, omega), ref, lam), ref


def check_barrier_gap_grid(points: int = 1000) -> CheckResult:
    half = np.linspace(1.0 / points, 1.0, points // 2)
    grid = np.concatenate([-half[::-1], half])
    worst = min(log_barrier_gap(x) for x in grid)
    return _result('barrier log gap grid', max(0.0, -worst), 1e-12, f'{grid.size} points, min gap {worst:.3e}')


def check_barrier_sandwich() -> CheckResult:
    worst = 0.0
    deltas = np.arange(0.05, 0.951, 0.05)
    for delta in deltas:
        q4 = np.linspace(delta, 1.0, 1000)
        qv_sq = 1.0 - q4 ** 2
        for alpha in (0.1, 0.5, 1.0, 5.0):
            lower, upper = quadratic_bounds(delta, alpha)
            V = -alpha * np.log(q4 ** 2)
            worst = max(worst, float(np.max(lower * qv_sq - V)), float(np.max(V - upper * qv_sq)))
    return _result('barrier quadratic sandwich', max(0.0, worst), 1e-12, f'{deltas.size} x 4 (delta, alpha) grid')


def check_phi_decomposition(samples: int = 2000, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        omega, omega_hat, err, ref = random_signals(rng)
        bundle = build_regressors(omega, err, ref, omega_hat, K_P)
        direct = direct_phi(omega, err, ref, K_P)
        worst = max(worst, float(np.max(np.abs(bundle.Phi - direct))),
                    float(np.max(np.abs(bundle.Phi - bundle.Phi1 - bundle.Phi2))))
    return _result('Phi = Phi1 + Phi2', worst, 1e-10, f'{samples} random states')


def check_pde_jacobian(samples: int = 200, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        omega, omega_hat, err, ref = random_signals(rng)
        bundle = build_regressors(omega, err, ref, omega_hat, K_P)
        scale = max(1.0, float(np.max(np.abs(bundle.Phi + bundle.Psi))))
        gap = pde.mu_jacobian_identity_check(bundle, omega, omega_hat, err, ref, K_P)
        worst = max(worst, gap / scale)
    return _result('dmu/domega = (Phi + Psi)^T', worst, 1e-5, f'{samples} random states, central differences')


def check_integrability_witness(seed: int = 2) -> CheckResult:
    omega, _, err, ref = random_signals(np.random.default_rng(seed))
    asym = pde.integrability_asymmetry(omega, err, ref)
    return _result('Phi2^T non-integrability witness', asym, 1e-3, 'asymmetry must exceed tolerance', above=True)


def check_adjugate(samples: int = 200, seed: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        A = rng.normal(size=(6, 6))
        N = A @ A.T
        det = np.linalg.det(N)
        gap = np.max(np.abs(adjugate(N) @ N - det * np.eye(6)))
        worst = max(worst, float(gap / abs(det)))
    return _result('adj(N) N = det(N) I', worst, 1e-8, f'{samples} random PSD matrices')


def check_prediction_error_identity(log: TrajectoryLog) -> CheckResult:
    theta_norm = np.linalg.norm(log.scenario.theta_true)
    Delta_N = log['Delta_N']
    gap = np.abs(log['eps'] - Delta_N[:, None] * log['theta_err']).max(axis=1)
    excited = Delta_N > 1e-3
    relative = float((gap[excited] / (Delta_N[excited] * theta_norm)).max()) if excited.any() else 0.0
    return _result('eps = Delta_N theta_err', relative, 1e-8,
                   f'{len(log)} samples, max absolute gap {gap.max():.3e}')


def check_pe_floor(log: TrajectoryLog, threshold: float = DEFAULT_PE_THRESHOLD) -> CheckResult:
    floor = pe_floor_monitor(log.t[:len(log)], log['Delta_N'], threshold)
    if not floor.detected:
        return CheckResult('Delta_N excitation floor', False, 0.0, threshold, 'Delta_N never settled above threshold')
    return _result('Delta_N excitation floor', floor.hbar, threshold,
                   f'T_s = {floor.T_s:.2f} s, hbar = {floor.hbar:.3e}', above=True)


STATIC_CHECKS: List[Callable[[], CheckResult]] = [
    check_barrier_gap_grid,
    check_barrier_sandwich,
    check_phi_decomposition,
    check_pde_jacobian,
    check_integrability_witness,
    check_adjugate,
]

TRAJECTORY_CHECKS: List[Callable[[TrajectoryLog], CheckResult]] = [
    check_prediction_error_identity,
    check_pe_floor,
]


def run_checks(duration: float = 10.0, threshold: Optional[float] = None) -> List[CheckResult]:
    results = []
    for check in STATIC_CHECKS:
        results.append(_guarded(check.__name__, check))

    try:
        log = run_scenario(Scenario(label='verify', duration=duration))
    except SimulationError as exc:
        logger.error(f"Verification run failed: {exc.message}")
        for check in TRAJECTORY_CHECKS:
            results.append(CheckResult(check.__name__, False, float('nan'), float('nan'),
                                       f'nominal run failed: {exc.message}'))
        return results

    for check in TRAJECTORY_CHECKS:
        if check is check_pe_floor and threshold is not None:
            results.append(_guarded(check.__name__, lambda: check_pe_floor(log, threshold)))
        else:
            results.append(_guarded(check.__name__, lambda c=check: c(log)))
    return results


def _guarded(name: str, fn) -> CheckResult:
    try:
        return fn()
    except Exception as exc:
        logger.error(f"Check {name} raised: {exc}")
        return CheckResult(name, False, float('nan'), float('nan'), f'raised {type(exc).__name__}: {exc}')
