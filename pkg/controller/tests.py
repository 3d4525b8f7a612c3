import numpy as np
from django.test import SimpleTestCase

from controller.gains import ControllerGains
from controller.laws import (
    EstimatorState, ce_baseline_derivative, ce_baseline_torque, control_torque, norm_sign,
    power_term, prediction_error, theta_hat_derivative, update_terms,
)
from drem.mixing import ScalarLre
from errstate.tracking import make_tracking_error
from plant.dynamics import BodyState
from plant.reference import reference_at
from regressor.regressors import build_regressors
from utils.constants import THETA_TRUE
from utils.exceptions import ScenarioConfigError

THETA = np.array(THETA_TRUE)


def bundle_at(t=5.0, seed=0):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=4)
    q = q / np.linalg.norm(q) * np.sign(q[3])
    omega = rng.uniform(-0.5, 0.5, 3)
    ref = reference_at(t)
    err = make_tracking_error(BodyState(q, omega), ref, 0.1)
    return build_regressors(omega, err, ref, omega + 0.05, 1.5), err


class ControllerGainsTests(SimpleTestCase):

    def test_filter_and_control_gains_follow_kappa(self):
        gains = ControllerGains(kappa=0.5, f_m=2.0)
        self.assertEqual(gains.k_p, 1.5)
        self.assertEqual(gains.k_f, gains.k_p)
        self.assertEqual(gains.as_dict()['k_p'], 1.5)

    def test_rejects_non_positive_gain(self):
        with self.assertRaises(ScenarioConfigError):
            ControllerGains(gamma=0.0)
        with self.assertRaises(ScenarioConfigError):
            ControllerGains(lambda1=-0.1)

    def test_power_exponent_ranges(self):
        with self.assertRaises(ScenarioConfigError):
            ControllerGains(iota1=1.0)
        with self.assertRaises(ScenarioConfigError):
            ControllerGains(iota2=1.0)


class ControlLawTests(SimpleTestCase):

    def test_zero_estimate_zero_torque(self):
        bundle, _ = bundle_at()
        est = EstimatorState(np.zeros(6), np.zeros(6))
        np.testing.assert_array_equal(control_torque(bundle, est), np.zeros(3))

    def test_torque_uses_full_estimate(self):
        bundle, _ = bundle_at()
        est = EstimatorState(THETA - 1.0, np.ones(6))
        np.testing.assert_allclose(control_torque(bundle, est), -bundle.Phi @ THETA, atol=1e-12)

    def test_prediction_error(self):
        est = EstimatorState(THETA.copy(), np.zeros(6))
        lre = ScalarLre(Y=np.zeros(6), Delta=0.0, Y_N=3.0 * THETA, Delta_N=3.0)
        np.testing.assert_allclose(prediction_error(est, lre), np.zeros(6), atol=1e-12)
        silent = ScalarLre(Y=np.zeros(6), Delta=0.0, Y_N=np.zeros(6), Delta_N=0.0)
        np.testing.assert_array_equal(prediction_error(est, silent), np.zeros(6))
        shifted = EstimatorState(THETA + 0.5, np.zeros(6))
        np.testing.assert_allclose(prediction_error(shifted, lre), 1.5 * np.ones(6), atol=1e-12)


class PowerTermTests(SimpleTestCase):

    def test_norm_sign(self):
        np.testing.assert_allclose(norm_sign(np.array([3.0, 4.0, 0, 0, 0, 0])), [0.6, 0.8, 0, 0, 0, 0])
        np.testing.assert_array_equal(norm_sign(np.zeros(6)), np.zeros(6))
        x = np.random.default_rng(1).normal(size=6)
        self.assertAlmostEqual(np.linalg.norm(norm_sign(x)), 1.0, places=14)

    def test_zero_error(self):
        gains = ControllerGains(lambda1=0.01, lambda2=0.01)
        np.testing.assert_array_equal(power_term(np.zeros(6), gains), np.zeros(6))

    def test_unit_error_finite_time_gains(self):
        gains = ControllerGains(lambda1=0.01, lambda2=0.0, iota1=0.85)
        eps = norm_sign(np.array([1.0, -2.0, 0.5, 0.0, 3.0, 1.0]))
        np.testing.assert_allclose(power_term(eps, gains), 0.01 * eps, atol=1e-16)

    def test_aligned_with_error(self):
        gains = ControllerGains(lambda1=0.01, lambda2=0.01)
        rng = np.random.default_rng(9)
        for _ in range(10000):
            eps = rng.normal(size=6) * 10.0 ** rng.uniform(-6, 3)
            self.assertGreaterEqual(eps @ power_term(eps, gains), 0.0)

    def test_continuous_at_origin(self):
        gains = ControllerGains(lambda1=0.01, lambda2=0.01)
        direction = norm_sign(np.ones(6))
        for scale in (1e-2, 1e-6, 1e-12):
            bound = 0.01 * scale ** 0.85 + 0.01 * scale ** 1.1
            self.assertLessEqual(np.linalg.norm(power_term(scale * direction, gains)), bound * (1 + 1e-12))


class UpdateLawTests(SimpleTestCase):

    def test_all_zero_inputs(self):
        bundle, _ = bundle_at()
        bundle.Phi[:] = 0.0
        bundle.Psi[:] = 0.0
        out = theta_hat_derivative(bundle, np.zeros(6), np.zeros(6), ControllerGains(), np.zeros(6))
        np.testing.assert_array_equal(out, np.zeros(6))

    def test_split_sums_to_total(self):
        bundle, _ = bundle_at()
        gains = ControllerGains(lambda1=0.01)
        rng = np.random.default_rng(3)
        mbd, eps = rng.normal(size=6), rng.normal(size=6)
        power = power_term(eps, gains)
        ii, learning = update_terms(bundle, mbd, eps, gains, power)
        np.testing.assert_allclose(ii + learning, theta_hat_derivative(bundle, mbd, eps, gains, power))
        np.testing.assert_allclose(learning, -gains.gamma * (gains.lam * eps + power))
        expected_ii = -gains.gamma * (mbd - (bundle.Phi + bundle.Psi).T @ bundle.ybar)
        np.testing.assert_allclose(ii, expected_ii)


class BaselineTests(SimpleTestCase):

    def test_baseline_torque_and_gradient(self):
        bundle, err = bundle_at(seed=4)
        gains = ControllerGains(gamma_ce=0.5)
        np.testing.assert_allclose(ce_baseline_torque(bundle, THETA), -bundle.Phi @ THETA)
        np.testing.assert_allclose(ce_baseline_derivative(bundle, err, gains), 0.5 * bundle.Phi.T @ err.s)

    def test_gradient_vanishes_on_target(self):
        ref = reference_at(0.0)
        err = make_tracking_error(BodyState(np.array([0.0, 0.0, 0.0, 1.0]), np.zeros(3)), ref, 0.1)
        bundle = build_regressors(np.zeros(3), err, ref, np.zeros(3), 1.5)
        np.testing.assert_array_equal(ce_baseline_derivative(bundle, err, ControllerGains()), np.zeros(6))
