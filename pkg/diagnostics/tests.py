from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from attmath.inertia import InertiaParams
from controller.gains import ControllerGains
from diagnostics import checks
from diagnostics.fits import exponential_envelope_fit
from diagnostics.lyapunov import lyapunov_series
from diagnostics.metrics import metrics, sync_ratio_spread
from diagnostics.report import analyze, render_report
from diagnostics.scaling import R_supremum, scaling_R, scaling_derivative, scaling_f, scaling_series
from diagnostics.settling import convergence_time, settling_bounds
from plant.perturbations import NoiseConfig
from regressor import pde
from sim.runner import TrajectoryLog, run_scenario
from sim.scenario import Scenario, initial_attitude
from utils.constants import THETA_TRUE
from utils.exceptions import ScenarioConfigError

THETA = np.array(THETA_TRUE)
J_M = InertiaParams(THETA).min_eigenvalue


def synthetic_log(n=201, duration=20.0):
    log = TrajectoryLog(Scenario(label='synthetic'), 0.1, n)
    log.t[:] = np.linspace(0.0, duration, n)
    log.data['q_e'][:, 3] = 1.0
    log.data['estimate'][:] = THETA
    log.size = n
    return log


class ScalingTests(SimpleTestCase):

    def test_no_perturbation_no_growth(self):
        self.assertEqual(scaling_derivative(0.5, np.zeros((3, 6)), 25.0, 2.0), 0.0)

    def test_growth_is_non_negative(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            Psi = rng.normal(size=(3, 6))
            self.assertGreaterEqual(scaling_derivative(rng.uniform(1e-3, 5.0), Psi, 25.0, 2.0), 0.0)

    def test_rejects_non_positive_r(self):
        with self.assertRaises(ValueError):
            scaling_derivative(0.0, np.ones((3, 6)), 25.0, 2.0)

    def test_R_bounds(self):
        for r in np.linspace(1e-3, 10.0, 200):
            f = scaling_f(r, 2.0)
            R = scaling_R(np.sqrt(np.log(f)), J_M)
            self.assertLessEqual(R, np.sqrt(J_M) * np.sqrt(f) * (1 + 1e-12))
            self.assertGreater(R, 0.0)
            self.assertLessEqual(R, np.sqrt(J_M * 3.0))
        self.assertLessEqual(R_supremum(J_M, 2.0), np.sqrt(J_M * 3.0))

    def test_series_matches_direct_integration(self):
        t = np.linspace(0.0, 1.0, 1001)
        psi_sq = 1e-3 * np.ones_like(t)
        diag = scaling_series(t, psi_sq, np.zeros((t.size, 6)), 25.0, 2.0, J_M, r0=0.1)
        r, h = 0.1, t[1] - t[0]
        for _ in range(t.size - 1):
            k1 = scaling_derivative(r, np.sqrt(psi_sq[0]) * np.eye(1), 25.0, 2.0)
            k2 = scaling_derivative(r + 0.5 * h * k1, np.sqrt(psi_sq[0]) * np.eye(1), 25.0, 2.0)
            k3 = scaling_derivative(r + 0.5 * h * k2, np.sqrt(psi_sq[0]) * np.eye(1), 25.0, 2.0)
            k4 = scaling_derivative(r + h * k3, np.sqrt(psi_sq[0]) * np.eye(1), 25.0, 2.0)
            r += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        self.assertAlmostEqual(diag.r[-1], r, places=8)
        self.assertFalse(diag.saturated)

    def test_saturation_flag(self):
        t = np.linspace(0.0, 10.0, 101)
        diag = scaling_series(t, np.ones_like(t), np.ones((t.size, 6)), 25.0, 2.0, J_M)
        self.assertTrue(diag.saturated)
        self.assertTrue(np.isinf(diag.r[-1]))
        self.assertAlmostEqual(diag.R[-1], R_supremum(J_M, 2.0))
        np.testing.assert_allclose(diag.z * diag.R[:, None], np.ones((t.size, 6)))


class EnvelopeFitTests(SimpleTestCase):

    def test_exact_exponential(self):
        t = np.linspace(0.0, 5.0, 501)
        rate, r2 = exponential_envelope_fit(t, np.exp(-2.0 * t), 0.0)
        self.assertAlmostEqual(rate, -2.0, delta=1e-6)
        self.assertGreater(r2, 0.9999)

    def test_constant_series(self):
        t = np.linspace(0.0, 5.0, 501)
        rate, _ = exponential_envelope_fit(t, 3.0 * np.ones_like(t), 1.0)
        self.assertEqual(rate, 0.0)

    def test_window_truncated_at_underflow(self):
        t = np.linspace(0.0, 10.0, 1001)
        V = np.exp(-2.0 * t)
        V[600:] = 0.0
        rate, _ = exponential_envelope_fit(t, V, 0.0)
        self.assertAlmostEqual(rate, -2.0, delta=1e-6)

    def test_too_few_samples(self):
        t = np.linspace(0.0, 1.0, 50)
        with self.assertRaises(ValueError):
            exponential_envelope_fit(t, np.exp(-t), 0.0)


class SettlingBoundTests(SimpleTestCase):

    def test_finite_time_only(self):
        gains = ControllerGains(lambda1=0.01, lambda2=0.0)
        bounds = settling_bounds(gains, hbar=0.5, V_z_at_Ts=0.2, R_m=3.0, T_s=4.0)
        self.assertIsNone(bounds.fixed)
        c1 = 50.0 ** 0.925 * 0.01 * 0.5 ** 0.85 * 3.0 ** -0.15
        self.assertAlmostEqual(bounds.c1, c1)
        rate = 0.01 * 25.0 * 0.5
        expected = 4.0 + np.log((2 * rate * 0.2 ** 0.075 + c1) / c1) / (rate * 0.15)
        self.assertAlmostEqual(bounds.finite, expected)

    def test_fixed_time(self):
        gains = ControllerGains(lambda1=0.01, lambda2=0.01)
        bounds = settling_bounds(gains, hbar=0.5, V_z_at_Ts=0.2, R_m=3.0, T_s=4.0)
        expected = 4.0 + 2.0 / (bounds.c1 * 0.15) + 2.0 / (bounds.c2 * 0.1)
        self.assertAlmostEqual(bounds.fixed, expected)

    def test_undefined_without_power_term(self):
        bounds = settling_bounds(ControllerGains(), hbar=0.5, V_z_at_Ts=0.2, R_m=3.0)
        self.assertIsNone(bounds.finite)
        self.assertIsNone(bounds.fixed)

    def test_convergence_time(self):
        t = np.linspace(0.0, 10.0, 11)
        err = np.exp(-t)[:, None] * np.ones((1, 6))
        self.assertEqual(convergence_time(t, err, 1e-3), 8.0)
        self.assertIsNone(convergence_time(t, np.ones((11, 6)), 1e-3))


class MetricsTests(SimpleTestCase):

    def test_zero_error_log(self):
        values = metrics(synthetic_log(), 0.0, 20.0)
        self.assertEqual(values['rms_qev'], 0.0)
        self.assertEqual(values['rms_omega_e'], 0.0)
        self.assertEqual(values['rms_theta_err'], 0.0)
        self.assertEqual(values['min_abs_qe4'], 1.0)
        self.assertIsNone(values['sync_ratio_spread'])

    def test_rms_is_maximum_over_components(self):
        log = synthetic_log()
        log.data['omega_e'][:, 1] = 2.0
        log.data['omega_e'][:, 2] = 1.0
        self.assertAlmostEqual(metrics(log, 0.0, 20.0)['rms_omega_e'], 2.0)

    def test_empty_window(self):
        with self.assertRaises(ScenarioConfigError):
            metrics(synthetic_log(), 30.0, 40.0)
        with self.assertRaises(ScenarioConfigError):
            metrics(synthetic_log(), 5.0, 5.0)

    def test_proportional_decay_is_synchronized(self):
        t = np.linspace(0.0, 10.0, 500)
        err = np.exp(-0.7 * t)[:, None] * np.array([1.0, -2.0, 0.5, 3.0, 0.1, -0.4])
        self.assertLess(sync_ratio_spread(err), 1e-9)

    def test_unsynchronized_decay(self):
        t = np.linspace(0.0, 10.0, 500)
        err = np.column_stack([np.exp(-t), np.exp(-0.5 * t)])
        self.assertGreater(sync_ratio_spread(err), 1.0)


class LyapunovTests(SimpleTestCase):

    def test_vanishes_at_equilibrium(self):
        series = lyapunov_series(synthetic_log(), THETA, ControllerGains())
        np.testing.assert_array_equal(series.V_total, np.zeros(201))
        self.assertEqual(series.eta, 2.0 * (1.0 / 0.5 + 1.0))


class NominalAnalysisTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.log = run_scenario(Scenario(label='nominal_case1', duration=40.0))
        cls.frame_before = cls.log.to_frame().copy()
        cls.analysis = analyze(cls.log)

    def test_excitation_floor(self):
        T_s = self.analysis.metrics['T_s_detected']
        self.assertIsNotNone(T_s)
        self.assertGreaterEqual(T_s, 2.0)
        self.assertLessEqual(T_s, 6.0)
        after = self.log.t[:len(self.log)] >= T_s
        self.assertTrue(np.all(self.log['Delta_N'][after] > 0))

    def test_lyapunov_function_non_increasing(self):
        self.assertLessEqual(self.analysis.V_increase, 1e-8)

    def test_quadratic_sandwich(self):
        self.assertLessEqual(self.analysis.sandwich_gap, 1e-12)

    def test_exponential_envelope(self):
        rate, r2 = self.analysis.envelope
        self.assertLess(rate, -0.01)
        self.assertGreater(r2, 0.9)

    def test_scaling_stays_in_range(self):
        R = self.analysis.lyapunov.scaling.R
        self.assertTrue(np.all(R > 0))
        self.assertTrue(np.all(R <= np.sqrt(J_M * 3.0) * (1 + 1e-12)))

    def test_manifold_attractivity(self):
        self.assertLess(self.log.final('manifold_residual'), 1e-3)

    def test_estimate_sign_pattern(self):
        k = int(np.argmin(np.abs(self.log.t[:len(self.log)] - 10.0)))
        self.assertGreater(self.log['Delta_N'][k], 0.0)
        eps, theta_err = self.log['eps'][k], self.log['theta_err'][k]
        significant = np.abs(theta_err) > 1e-6
        np.testing.assert_array_equal(np.sign(eps[significant]), np.sign(theta_err[significant]))

    def test_analysis_is_read_only(self):
        self.assertTrue(self.frame_before.equals(self.log.to_frame()))

    def test_report_mentions_key_quantities(self):
        text = render_report(self.analysis, self.log.scenario)
        self.assertIn('T_s_detected', text)
        self.assertIn('hbar', text)
        self.assertIn('nominal_case1', text)


class FiniteFixedTimeTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        finite = ControllerGains(lambda1=0.01, lambda2=0.0, iota1=0.85)
        fixed = ControllerGains(lambda1=0.01, lambda2=0.01, iota1=0.85, iota2=1.1)
        cls.finite = analyze(run_scenario(Scenario(label='finite_time', duration=60.0, gains=finite,
                                                   variant='finite_time')))
        cls.fixed = analyze(run_scenario(Scenario(label='fixed_time', duration=60.0, gains=fixed,
                                                  variant='fixed_time')))

    def test_both_converge(self):
        self.assertIsNotNone(self.finite.convergence_time)
        self.assertIsNotNone(self.fixed.convergence_time)

    def test_fixed_time_not_slower(self):
        self.assertLessEqual(self.fixed.convergence_time, self.finite.convergence_time)

    def test_observed_times_respect_bounds(self):
        self.assertIsNotNone(self.finite.bounds.finite)
        self.assertLessEqual(self.finite.convergence_time, self.finite.bounds.finite)
        self.assertIsNotNone(self.fixed.bounds.fixed)
        self.assertLessEqual(self.fixed.convergence_time, self.fixed.bounds.fixed)


class PerturbedCampaignTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        common = dict(duration=100.0, q0=initial_attitude(2), disturbance=True,
                      noise=NoiseConfig(seed=2024), seed=2024)
        cls.ii_log = run_scenario(Scenario(label='perturbed_case2', **common))
        cls.ce_log = run_scenario(Scenario(label='perturbed_ce_baseline', variant='ce_baseline', **common))
        cls.ii = metrics(cls.ii_log, 40.0, 100.0)
        cls.ce = metrics(cls.ce_log, 40.0, 100.0)

    def test_composite_law_in_expected_range(self):
        self.assertGreaterEqual(self.ii['rms_qev'], 1e-4)
        self.assertLessEqual(self.ii['rms_qev'], 2.5e-3)
        self.assertGreaterEqual(self.ii['rms_omega_e'], 2e-4)
        self.assertLessEqual(self.ii['rms_omega_e'], 5e-3)
        self.assertLess(self.ii['rms_theta_err'], 1.0)

    def test_composite_law_beats_baseline(self):
        for key in ('rms_qev', 'rms_omega_e', 'rms_theta_err'):
            self.assertLess(self.ii[key], self.ce[key], key)

    def test_baseline_tracks_without_identifying(self):
        self.assertGreater(np.linalg.norm(self.ce_log.final('theta_err')), 1.0)
        self.assertLess(np.linalg.norm(self.ce_log.final('s')), 1e-2)


class VerificationSuiteTests(SimpleTestCase):

    def test_static_checks_pass(self):
        for check in checks.STATIC_CHECKS:
            result = check()
            self.assertTrue(result.passed, f'{result.name}: {result.deviation} > {result.tolerance}')

    def test_corrupted_mu2_is_caught(self):
        original = pde.mu2

        def corrupted(*args):
            return 1.01 * original(*args)

        with mock.patch('regressor.pde.mu2', side_effect=corrupted):
            result = checks.check_pde_jacobian(samples=20)
        self.assertFalse(result.passed)
        self.assertGreater(result.deviation, 1e-5)
