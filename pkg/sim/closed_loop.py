"""
Closed-loop vector field: plant, reference, filters and controller as one ODE.

The control input is evaluated inside every RK4 stage. Measurement noise is
drawn by the runner once per step and held in `ClosedLoop.sample` for all
four stages. chi and Xi decay at the rate Delta^2, which grows far past
what explicit RK4 tolerates at h = 0.01 s, so `step_closed_loop` solves
that decay in closed form.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from attmath.inertia import InertiaParams
from attmath.quaternion import quat_derivative
from controller.laws import (
    EstimatorState, ce_baseline_derivative, ce_baseline_torque, control_torque, power_term,
    prediction_error, update_terms,
)
from drem.filters import DremState, drem_derivative
from drem.mixing import ScalarLre, extend, mix
from errstate.tracking import TrackingError, make_tracking_error
from plant.dynamics import BodyState, plant_derivative
from plant.perturbations import NoiseSample, apply_noise, disturbance_at
from plant.reference import ReferenceState, reference_at
from regressor.pde import mu_bar_dot, mu_from_bundle, omega_hat_derivative
from regressor.regressors import RegressorBundle, build_regressors
from sim.integrator import rk4_relaxed_finish
from sim.scenario import Scenario
from sim.state import RELAXED, SLICES, AugmentedState, pack_symmetric, project_state
from utils.exceptions import UnwindingGuardBreach

logger = logging.getLogger(__name__)

ZERO3 = np.zeros(3)
ZERO6 = np.zeros(6)


@dataclass
class LoopSignals:
    """Every intermediate signal of one vector-field evaluation."""
    t: float
    state: AugmentedState
    measured: BodyState
    ref: ReferenceState
    err: TrackingError
    bundle: RegressorBundle
    lre: ScalarLre
    est: EstimatorState
    mu: np.ndarray
    mu_bar_dot: np.ndarray
    eps: np.ndarray
    power: np.ndarray
    update_ii: np.ndarray
    update_drem: np.ndarray
    u: np.ndarray
    u_d: np.ndarray
    x_dot: np.ndarray
    # x_dot with the chi and Xi decay removed, and its rate Delta^2
    slope: np.ndarray
    rate: float


class ClosedLoop:
    """Vector field of the augmented state for one scenario.

    `lambda_slope` is Lambda = beta sign(q_e4(0)), fixed before the first step.
    """

    def __init__(self, scenario: Scenario, lambda_slope: float):
        self.scenario = scenario
        self.gains = scenario.gains
        self.inertia = InertiaParams(np.asarray(scenario.theta_true, dtype=float))
        self.lambda_slope = lambda_slope
        self.chi0 = np.asarray(scenario.chi0, dtype=float)
        self.sample: Optional[NoiseSample] = None
        # filters are frozen in the baseline, so its scalar LRE is constant
        self._frozen_lre: Optional[ScalarLre] = None

    def measure(self, body: BodyState) -> BodyState:
        if self.sample is None:
            return body
        return apply_noise(body, self.sample)

    def _guard(self, err: TrackingError, t: float, state: AugmentedState):
        if abs(err.q_e4) < self.scenario.unwinding_guard:
            logger.error(
                f"Unwinding guard breached in '{self.scenario.label}' at t={t:.4f}: "
                f"q_e4={err.q_e4:.3e}, q={state.q.tolist()}, omega={state.omega.tolist()}, "
                f"theta_hat={state.theta_hat.tolist()}"
            )
            raise UnwindingGuardBreach(
                f"|q_e4| = {abs(err.q_e4):.3e} fell below the guard {self.scenario.unwinding_guard:g} "
                f"at t = {t:.4f} s",
                details={'t': t, 'q_e': err.q_e.tolist()},
            )

    def _scalar_lre(self, filters: DremState) -> ScalarLre:
        if self._frozen_lre is not None:
            return self._frozen_lre
        lre = extend(filters, mix(filters, self.gains.k_I), self.gains.k_N)
        if self.scenario.is_baseline:
            self._frozen_lre = lre
        return lre

    def evaluate(self, x: np.ndarray, t: float) -> LoopSignals:
        gains = self.gains
        state = AugmentedState.unpack(x)
        body = BodyState(state.q, state.omega)
        measured = self.measure(body)
        omega = measured.omega
        omega_hat = omega if self.scenario.pin_omega_hat else state.omega_hat

        ref = reference_at(t, state.q_r, self.scenario.excitation_cutoff)
        err = make_tracking_error(measured, ref, self.lambda_slope)
        self._guard(err, t, state)

        bundle = build_regressors(omega, err, ref, omega_hat, gains.k_p)
        filters = DremState(state.omega_f, state.W_f, state.u_f, state.M, state.N,
                            state.chi, state.Xi, self.chi0)
        lre = self._scalar_lre(filters)
        u_d = disturbance_at(t) if self.scenario.disturbance else ZERO3

        if self.scenario.is_baseline:
            mu = mbd = ZERO6
            est = EstimatorState(state.theta_hat, ZERO6)
            eps = prediction_error(est, lre)
            power = update_ii = update_drem = ZERO6
            u = ce_baseline_torque(bundle, state.theta_hat)
            theta_hat_dot = ce_baseline_derivative(bundle, err, gains)
            q_dot, omega_dot = plant_derivative(body, u, u_d, self.inertia)
            omega_hat_dot = omega_hat_derivative(omega_hat, bundle.ybar, omega, gains.k_f)
        else:
            mu = mu_from_bundle(omega, omega_hat, bundle, err.lambda_slope, gains.k_p)
            est = EstimatorState(state.theta_hat, gains.gamma * mu)
            eps = prediction_error(est, lre)
            power = power_term(eps, gains)
            u = control_torque(bundle, est)
            q_dot, omega_dot = plant_derivative(body, u, u_d, self.inertia)
            if self.scenario.pin_omega_hat:
                omega_hat_dot = omega_dot
            else:
                omega_hat_dot = omega_hat_derivative(omega_hat, bundle.ybar, omega, gains.k_f)
            mbd = mu_bar_dot(omega, omega_hat, omega_hat_dot, err, ref, bundle, gains.k_p)
            update_ii, update_drem = update_terms(bundle, mbd, eps, gains, power)
            theta_hat_dot = update_ii + update_drem

        x_dot = np.empty_like(x)
        s = SLICES
        x_dot[s['q']] = q_dot
        x_dot[s['omega']] = omega_dot
        x_dot[s['q_r']] = quat_derivative(state.q_r, ref.omega_r)
        x_dot[s['omega_hat']] = omega_hat_dot
        x_dot[s['theta_hat']] = theta_hat_dot
        if self.scenario.is_baseline:
            # the baseline law never reads the filters
            x_dot[s['omega_f'].start:] = 0.0
            rate = 0.0
        else:
            filters_dot = drem_derivative(filters, omega, u, gains.a, gains.b, lre.Delta, lre.Y)
            x_dot[s['omega_f']] = filters_dot.omega_f
            x_dot[s['W_f']] = np.ravel(filters_dot.W_f)
            x_dot[s['u_f']] = filters_dot.u_f
            x_dot[s['M']] = filters_dot.M
            x_dot[s['N']] = pack_symmetric(filters_dot.N)
            x_dot[s['chi']] = filters_dot.chi
            x_dot[s['Xi']] = filters_dot.Xi
            rate = lre.Delta * lre.Delta
        slope = x_dot.copy()
        if not self.scenario.is_baseline:
            slope[s['chi']] = lre.Delta * lre.Y
            slope[s['Xi']] = 0.0

        return LoopSignals(
            t=t, state=state, measured=measured, ref=ref, err=err, bundle=bundle, lre=lre,
            est=est, mu=mu, mu_bar_dot=mbd, eps=eps, power=power, update_ii=update_ii,
            update_drem=update_drem, u=u, u_d=u_d, x_dot=x_dot, slope=slope, rate=rate,
        )

    def field(self, x: np.ndarray, t: float) -> Tuple[np.ndarray, float]:
        sig = self.evaluate(x, t)
        return sig.slope, sig.rate


def closed_loop_derivative(x: np.ndarray, t: float, loop: ClosedLoop) -> np.ndarray:
    """d/dt of the augmented state, including chi' and Xi' in their plain form."""
    return loop.evaluate(x, t).x_dot


def step_closed_loop(x: np.ndarray, t: float, h: float, loop: ClosedLoop, first: LoopSignals) -> np.ndarray:
    """One RK4 step from the signals already evaluated at (x, t).

    chi and Xi are advanced in closed form over every stage, so their stiff
    decay rate Delta^2 never limits the step size.
    """
    return rk4_relaxed_finish(x, t, h, loop.field, (first.slope, first.rate), RELAXED, project_state)
