"""
Scenario execution and the trajectory log.
"""
import logging
import time
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from attmath.quaternion import normalize, quat_error
from drem.filters import DremState
from drem.mixing import det_underflows
from errstate.barrier import barrier_value
from errstate.tracking import initial_slope, make_tracking_error
from plant.dynamics import BodyState
from plant.perturbations import apply_noise, draw_noise
from plant.reference import reference_at
from regressor.pde import mu_from_bundle
from regressor.regressors import build_regressors
from sim.closed_loop import ClosedLoop, LoopSignals, step_closed_loop
from sim.scenario import Scenario
from sim.state import AugmentedState
from utils.exceptions import NonFiniteStateError

logger = logging.getLogger(__name__)

# (name, width, unit)
CHANNELS: List[Tuple[str, int, str]] = [
    ('q', 4, '-'),
    ('omega', 3, 'rad/s'),
    ('q_r', 4, '-'),
    ('omega_hat', 3, 'rad/s'),
    ('q_e', 4, '-'),
    ('omega_e', 3, 'rad/s'),
    ('s', 3, 'rad/s'),
    ('u', 3, 'N*m'),
    ('theta_hat', 6, 'kg*m^2'),
    ('zeta', 6, 'kg*m^2'),
    ('estimate', 6, 'kg*m^2'),
    ('theta_err', 6, 'kg*m^2'),
    ('eps', 6, 'kg*m^2'),
    ('Delta', 1, '-'),
    ('Delta_N', 1, '-'),
    ('Xi', 1, '-'),
    ('chi', 6, 'kg*m^2'),
    ('V_q', 1, '-'),
    ('manifold_residual', 1, 'N*m'),
    ('psi_sq', 1, 'rad^4/s^4'),
    ('update_ii', 6, 'kg*m^2/s'),
    ('update_drem', 6, 'kg*m^2/s'),
    ('min_eig_N', 1, '-'),
]


def channel_columns(name: str, width: int, unit: str) -> List[str]:
    if width == 1:
        return [f'{name}[{unit}]']
    return [f'{name}_{i + 1}[{unit}]' for i in range(width)]


class TrajectoryLog:
    """Per-step record of one run; row k is the state at t = k h."""

    def __init__(self, scenario: Scenario, lambda_slope: float, rows: int):
        self.scenario = scenario
        self.lambda_slope = lambda_slope
        self.t = np.zeros(rows)
        self.data: Dict[str, np.ndarray] = {
            name: np.zeros((rows, width)) for name, width, _ in CHANNELS
        }
        self.size = 0
        self.wall_time = 0.0
        self.det_underflow = False

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, name: str) -> np.ndarray:
        values = self.data[name][:self.size]
        return values[:, 0] if values.shape[1] == 1 else values

    def record(self, sig: LoopSignals, theta_true: np.ndarray, alpha: float):
        k = self.size
        state, err, bundle = sig.state, sig.err, sig.bundle
        theta_err = sig.est.estimate - theta_true
        row = {
            'q': state.q, 'omega': state.omega, 'q_r': state.q_r, 'omega_hat': state.omega_hat,
            'q_e': err.q_e, 'omega_e': err.omega_e, 's': err.s, 'u': sig.u,
            'theta_hat': state.theta_hat, 'zeta': sig.est.zeta, 'estimate': sig.est.estimate,
            'theta_err': theta_err, 'eps': sig.eps,
            'Delta': sig.lre.Delta, 'Delta_N': sig.lre.Delta_N, 'Xi': state.Xi, 'chi': state.chi,
            'V_q': barrier_value(err.q_e, alpha),
            'manifold_residual': np.linalg.norm(bundle.Phi @ theta_err),
            'psi_sq': np.sum(bundle.Psi ** 2),
            'update_ii': sig.update_ii, 'update_drem': sig.update_drem,
            'min_eig_N': np.linalg.eigvalsh(state.N)[0],
        }
        self.t[k] = sig.t
        for name, value in row.items():
            self.data[name][k] = value
        self.size += 1

    def final(self, name: str):
        return self[name][-1]

    def window(self, t_start: float, t_end: float) -> np.ndarray:
        t = self.t[:self.size]
        return (t >= t_start - 1e-9) & (t <= t_end + 1e-9)

    def to_frame(self) -> pd.DataFrame:
        columns = {'t[s]': self.t[:self.size]}
        for name, width, unit in CHANNELS:
            block = self.data[name][:self.size]
            for i, column in enumerate(channel_columns(name, width, unit)):
                columns[column] = block[:, i]
        return pd.DataFrame(columns)


def initial_state(scenario: Scenario, loop: ClosedLoop, measured: BodyState, body: BodyState) -> np.ndarray:
    """Augmented state at t=0.

    omega_hat(0) is the measured rate and theta_hat(0) is chosen so that
    theta_hat(0) + gamma mu(0) equals the configured initial estimate.
    """
    gains = scenario.gains
    estimate0 = np.asarray(scenario.theta_estimate0, dtype=float)
    q_r0 = normalize(np.asarray(scenario.q_r0, dtype=float))
    omega_hat0 = measured.omega.copy()
    if scenario.is_baseline:
        theta_hat0 = estimate0
    else:
        ref0 = reference_at(0.0, q_r0, scenario.excitation_cutoff)
        err0 = make_tracking_error(measured, ref0, loop.lambda_slope)
        bundle0 = build_regressors(measured.omega, err0, ref0, omega_hat0, gains.k_p)
        mu0 = mu_from_bundle(measured.omega, omega_hat0, bundle0, loop.lambda_slope, gains.k_p)
        theta_hat0 = estimate0 - gains.gamma * mu0

    filters = DremState.initial(measured.omega, gains.a, np.asarray(scenario.chi0, dtype=float))
    return AugmentedState(
        q=body.q, omega=body.omega, q_r=q_r0, omega_hat=omega_hat0, theta_hat=theta_hat0,
        omega_f=filters.omega_f, W_f=filters.W_f, u_f=filters.u_f, M=filters.M, N=filters.N,
        chi=filters.chi, Xi=filters.Xi,
    ).pack()


def _check_finite(x: np.ndarray, t: float, k: int, scenario: Scenario):
    if np.all(np.isfinite(x)):
        return
    state = AugmentedState.unpack(x)
    logger.error(
        f"Non-finite state in '{scenario.label}' after step {k} (t={t:.4f}): "
        f"q={state.q.tolist()}, omega={state.omega.tolist()}, theta_hat={state.theta_hat.tolist()}, "
        f"Xi={state.Xi}, chi={state.chi.tolist()}"
    )
    raise NonFiniteStateError(
        f"State became non-finite at t = {t:.4f} s (step {k})",
        details={'t': t, 'step': k, 'bad_entries': np.flatnonzero(~np.isfinite(x)).tolist()},
    )


def run_scenario(scenario: Scenario, progress: Optional[int] = None) -> TrajectoryLog:
    """Integrate the closed loop with fixed-step RK4 and log every step.

    `progress` logs a DEBUG line every that many steps.
    """
    gains = scenario.gains
    h = scenario.step
    steps = scenario.steps
    theta_true = np.asarray(scenario.theta_true, dtype=float)
    started = time.perf_counter()

    body0 = BodyState(normalize(np.asarray(scenario.q0, dtype=float)),
                      np.asarray(scenario.omega0, dtype=float))
    noise = scenario.noise
    rng = noise.make_rng() if noise is not None and not noise.is_silent else None
    sample = draw_noise(noise, rng) if rng is not None else None
    measured0 = apply_noise(body0, sample) if sample is not None else body0

    q_e0 = quat_error(measured0.q, normalize(np.asarray(scenario.q_r0, dtype=float)))
    lambda_slope = initial_slope(q_e0, gains.beta)
    loop = ClosedLoop(scenario, lambda_slope)
    loop.sample = sample

    logger.info(
        f"Run '{scenario.label}' started: variant={scenario.variant}, steps={steps}, h={h}, "
        f"seed={scenario.seed}, Lambda={lambda_slope:+g}"
    )

    x = initial_state(scenario, loop, measured0, body0)
    log = TrajectoryLog(scenario, lambda_slope, steps + 1)

    for k in range(steps + 1):
        t = k * h
        signals = loop.evaluate(x, t)
        log.record(signals, theta_true, gains.alpha)

        if not log.det_underflow and k > 0 and det_underflows(signals.lre.Delta, signals.state.N):
            log.det_underflow = True
            logger.warning(
                f"det N underflows relative to k_I={gains.k_I:g} in '{scenario.label}' at t={t:.3f}; "
                "Delta is effectively zero"
            )
        if progress and k % progress == 0:
            logger.debug(f"'{scenario.label}' t={t:.2f} |q_ev|={np.linalg.norm(signals.err.q_ev):.3e}")
        if k == steps:
            break

        x = step_closed_loop(x, t, h, loop, signals)
        _check_finite(x, (k + 1) * h, k + 1, scenario)
        if rng is not None:
            loop.sample = draw_noise(noise, rng)

    log.wall_time = time.perf_counter() - started
    logger.info(
        f"Run '{scenario.label}' finished: {steps} steps in {log.wall_time:.2f}s, "
        f"|theta_err(T)|={np.linalg.norm(log.final('theta_err')):.3e}"
    )
    return log
