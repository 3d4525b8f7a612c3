import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import quad

from attmath.inertia import InertiaParams, lmap
from attmath.quaternion import (
    IDENTITY, kinematics_matrix, normalize, quat_derivative, random_unit_quaternion,
)
from errstate.tracking import make_tracking_error
from plant.dynamics import BodyState, plant_derivative
from plant.reference import reference_at
from regressor.pde import (
    fd_jacobian, integrability_asymmetry, mu1, mu2, mu_bar_dot, mu_jacobian_identity_check,
    mu_from_bundle, mu_total, omega_hat_derivative,
)
from regressor.regressors import (
    build_regressors, build_y, build_ybar, direct_phi, phi2, substitution_points,
)
from utils.constants import THETA_TRUE

K_P = 1.5


def random_signals(rng, same_filter=False):
    t = rng.uniform(0.0, 40.0)
    ref = reference_at(t, q_r=random_unit_quaternion(rng))
    q = random_unit_quaternion(rng)
    omega = rng.uniform(-1.0, 1.0, 3)
    omega_hat = omega.copy() if same_filter else omega + rng.uniform(-0.3, 0.3, 3)
    lam = 0.1 if rng.random() < 0.5 else -0.1
    err = make_tracking_error(BodyState(q, omega), ref, lam)
    return omega, omega_hat, err, ref


class BuildYTests(SimpleTestCase):

    def test_vanishes_at_rest(self):
        ref = reference_at(0.0)
        err = make_tracking_error(BodyState(IDENTITY.copy(), np.zeros(3)), ref, 0.1)
        np.testing.assert_allclose(build_y(err, ref, K_P), np.zeros(3), atol=1e-16)

    def test_static_reference(self):
        ref = reference_at(0.0)
        q = np.array([0.2, -0.1, 0.3, np.sqrt(1 - 0.14)])
        err = make_tracking_error(BodyState(q, np.zeros(3)), ref, 0.1)
        expected = K_P * 0.1 * q[:3] + q[:3] / q[3]
        np.testing.assert_allclose(build_y(err, ref, K_P), expected, atol=1e-15)

    def test_ybar_relation(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            omega, _, err, ref = random_signals(rng)
            y = build_y(err, ref, K_P)
            Omega = err.C @ ref.omega_r
            expected = K_P * omega + np.cross(omega, Omega) + err.lambda_slope * kinematics_matrix(err.q_e) @ omega
            np.testing.assert_allclose(build_ybar(y, omega, err, ref, K_P) - y, expected, atol=1e-13)


class RegressorBundleTests(SimpleTestCase):

    def setUp(self):
        self.rng = np.random.default_rng(5)

    def test_bundle_reuses_output_definitions(self):
        for _ in range(20):
            omega, omega_hat, err, ref = random_signals(self.rng)
            bundle = build_regressors(omega, err, ref, omega_hat, K_P)
            y = build_y(err, ref, K_P)
            np.testing.assert_array_equal(bundle.y, y)
            np.testing.assert_array_equal(bundle.ybar, build_ybar(y, omega, err, ref, K_P))

    def test_decomposition_matches_direct_regressor(self):
        for _ in range(10000):
            omega, omega_hat, err, ref = random_signals(self.rng)
            bundle = build_regressors(omega, err, ref, omega_hat, K_P)
            np.testing.assert_allclose(bundle.Phi, bundle.Phi1 + bundle.Phi2, atol=1e-10)
            np.testing.assert_allclose(bundle.Phi, direct_phi(omega, err, ref, K_P), atol=1e-10)
            np.testing.assert_array_equal(bundle.Psi, bundle.Phi2hat - bundle.Phi2)

    def test_regressor_reproduces_inertial_terms(self):
        inertia = InertiaParams(np.array(THETA_TRUE))
        J = inertia.matrix
        for _ in range(100):
            omega, omega_hat, err, ref = random_signals(self.rng)
            bundle = build_regressors(omega, err, ref, omega_hat, K_P)
            q_ev_dot = bundle.Q @ err.omega_e
            inner = (np.cross(omega, bundle.Omega) - bundle.Omega_bar + K_P * err.s + bundle.xi
                     + err.lambda_slope * q_ev_dot)
            expected = -np.cross(omega, J @ omega) + J @ inner
            np.testing.assert_allclose(bundle.Phi @ inertia.theta, expected, atol=1e-10)

    def test_no_filter_mismatch_means_no_perturbation(self):
        omega, omega_hat, err, ref = random_signals(self.rng, same_filter=True)
        bundle = build_regressors(omega, err, ref, omega_hat, K_P)
        np.testing.assert_array_equal(bundle.Phi2hat, bundle.Phi2)
        np.testing.assert_array_equal(bundle.Psi, np.zeros((3, 6)))

    def test_reconfigured_rows_use_substituted_arguments(self):
        omega, omega_hat, err, ref = random_signals(self.rng)
        bundle = build_regressors(omega, err, ref, omega_hat, K_P)
        points = substitution_points(omega, omega_hat)
        for i in range(3):
            row = phi2(points[i], bundle.Omega, bundle.Q, err.lambda_slope)[i]
            np.testing.assert_allclose(bundle.Phi2hat[i], row, atol=1e-15)


class MuTests(SimpleTestCase):

    def setUp(self):
        self.rng = np.random.default_rng(6)

    def test_mu1_examples(self):
        np.testing.assert_array_equal(mu1(np.zeros(3), np.array([0.3, 0.1, -0.2]), K_P), np.zeros(6))
        np.testing.assert_allclose(mu1(np.array([1.0, 2.0, 3.0]), np.zeros(3), 1.0), [0.5, 2, 4.5, 6, 3, 2])

    def test_mu1_jacobian(self):
        omega, _, err, ref = random_signals(self.rng)
        y = build_y(err, ref, K_P)
        jac = fd_jacobian(lambda w: mu1(w, y, K_P), omega)
        np.testing.assert_allclose(jac, (K_P * lmap(omega) + lmap(y)).T, rtol=1e-6, atol=1e-8)

    def test_mu2_vanishes_at_zero_rate(self):
        _, omega_hat, err, ref = random_signals(self.rng)
        np.testing.assert_array_equal(mu2(np.zeros(3), omega_hat, err, ref), np.zeros(6))

    def test_mu2_jacobian_is_reconfigured_regressor(self):
        for _ in range(1000):
            omega, omega_hat, err, ref = random_signals(self.rng)
            bundle = build_regressors(omega, err, ref, omega_hat, K_P)
            jac = fd_jacobian(lambda w: mu2(w, omega_hat, err, ref), omega)
            np.testing.assert_allclose(jac, bundle.Phi2hat.T, rtol=1e-6, atol=1e-8)

    def test_mu2_matches_quadrature(self):
        for _ in range(100):
            omega, omega_hat, err, ref = random_signals(self.rng)
            Omega = err.C @ ref.omega_r
            Q = kinematics_matrix(err.q_e)
            expected = np.zeros(6)
            for i in range(3):
                def integrand(tau, k, i=i):
                    point = omega_hat.copy()
                    point[i] = tau
                    return phi2(point, Omega, Q, err.lambda_slope)[i, k]
                for k in range(6):
                    expected[k] += quad(integrand, 0.0, omega[i], args=(k,), epsabs=1e-10, epsrel=1e-10)[0]
            np.testing.assert_allclose(mu2(omega, omega_hat, err, ref), expected, atol=1e-8)

    def test_bundle_evaluation_matches_full_mu(self):
        for _ in range(200):
            omega, omega_hat, err, ref = random_signals(self.rng)
            bundle = build_regressors(omega, err, ref, omega_hat, K_P)
            np.testing.assert_allclose(
                mu_from_bundle(omega, omega_hat, bundle, err.lambda_slope, K_P),
                mu_total(omega, omega_hat, err, ref, bundle.y, K_P),
                rtol=1e-12, atol=1e-14,
            )

    def test_pde_identity(self):
        omega, omega_hat, err, ref = random_signals(self.rng)
        bundle = build_regressors(omega, err, ref, omega_hat, K_P)
        self.assertLess(mu_jacobian_identity_check(bundle, omega, omega_hat, err, ref, K_P), 1e-5)

    def test_pde_identity_reduced_case(self):
        ref = reference_at(0.0)
        omega = np.array([0.2, -0.4, 0.1])
        err = make_tracking_error(BodyState(IDENTITY.copy(), omega), ref, 0.1)
        bundle = build_regressors(omega, err, ref, omega.copy(), K_P)
        self.assertLess(mu_jacobian_identity_check(bundle, omega, omega.copy(), err, ref, K_P), 1e-6)

    def test_central_differences_are_exact_for_quadratic_mu(self):
        # mu is quadratic in omega, so the only FD error left is rounding
        omega, omega_hat, err, ref = random_signals(self.rng)
        bundle = build_regressors(omega, err, ref, omega_hat, K_P)
        for h in (1e-4, 1e-5, 1e-6):
            self.assertLess(mu_jacobian_identity_check(bundle, omega, omega_hat, err, ref, K_P, h=h), 1e-8)

    def test_non_integrability_witness(self):
        rng = np.random.default_rng(2024)
        omega, _, err, ref = random_signals(rng)
        self.assertGreater(integrability_asymmetry(omega, err, ref), 1e-3)

    def test_mu_bar_dot_static_case(self):
        ref = reference_at(0.0)
        err = make_tracking_error(BodyState(IDENTITY.copy(), np.zeros(3)), ref, 0.1)
        bundle = build_regressors(np.zeros(3), err, ref, np.zeros(3), K_P)
        omega_hat_dot = omega_hat_derivative(np.zeros(3), bundle.ybar, np.zeros(3), K_P)
        value = mu_bar_dot(np.zeros(3), np.zeros(3), omega_hat_dot, err, ref, bundle, K_P)
        np.testing.assert_allclose(value, np.zeros(6), atol=1e-16)

    def test_mu_bar_dot_matches_frozen_rate_difference(self):
        # Move every argument except omega along its exact rate and difference mu
        t0 = 7.3
        ref = reference_at(t0, q_r=random_unit_quaternion(self.rng))
        q_body = random_unit_quaternion(self.rng)
        omega = self.rng.uniform(-1.0, 1.0, 3)
        omega_hat = omega + self.rng.uniform(-0.3, 0.3, 3)
        err = make_tracking_error(BodyState(q_body, omega), ref, -0.1)
        bundle = build_regressors(omega, err, ref, omega_hat, K_P)
        omega_hat_dot = omega_hat_derivative(omega_hat, bundle.ybar, omega, K_P)
        analytic = mu_bar_dot(omega, omega_hat, omega_hat_dot, err, ref, bundle, K_P)

        def mu_at(dt):
            q_r = normalize(ref.q_r + dt * quat_derivative(ref.q_r, ref.omega_r))
            ref_t = reference_at(t0 + dt, q_r=q_r)
            body = BodyState(normalize(q_body + dt * quat_derivative(q_body, omega)), omega)
            err_t = make_tracking_error(body, ref_t, err.lambda_slope)
            y_t = build_y(err_t, ref_t, K_P)
            return mu_total(omega, omega_hat + dt * omega_hat_dot, err_t, ref_t, y_t, K_P)

        h = 1e-5
        numeric = (mu_at(h) - mu_at(-h)) / (2 * h)
        np.testing.assert_allclose(analytic, numeric, atol=1e-6)


class MuAlongTrajectoryTests(SimpleTestCase):
    """d/dt mu along a closed-loop-like motion equals mu_bar_dot + (Phi + Psi)^T omega_dot."""

    def setUp(self):
        rng = np.random.default_rng(31)
        self.t0 = 11.2
        self.ref = reference_at(self.t0, q_r=random_unit_quaternion(rng))
        self.q_body = random_unit_quaternion(rng)
        self.omega = rng.uniform(-1.0, 1.0, 3)
        self.omega_hat = self.omega + rng.uniform(-0.3, 0.3, 3)
        self.lam = 0.1
        body = BodyState(self.q_body, self.omega)
        err = make_tracking_error(body, self.ref, self.lam)
        self.bundle = build_regressors(self.omega, err, self.ref, self.omega_hat, K_P)
        inertia = InertiaParams(np.array(THETA_TRUE))
        torque = rng.uniform(-2.0, 2.0, 3)
        self.omega_dot = plant_derivative(body, torque, np.zeros(3), inertia)[1]
        self.omega_hat_dot = omega_hat_derivative(self.omega_hat, self.bundle.ybar, self.omega, K_P)
        self.analytic = (mu_bar_dot(self.omega, self.omega_hat, self.omega_hat_dot, err, self.ref,
                                    self.bundle, K_P)
                         + (self.bundle.Phi + self.bundle.Psi).T @ self.omega_dot)

    def mu_at(self, dt):
        ref = self.ref
        q_r = normalize(ref.q_r + dt * quat_derivative(ref.q_r, ref.omega_r))
        ref_t = reference_at(self.t0 + dt, q_r=q_r)
        omega_t = self.omega + dt * self.omega_dot
        q_t = normalize(self.q_body + dt * quat_derivative(self.q_body, self.omega))
        err_t = make_tracking_error(BodyState(q_t, omega_t), ref_t, self.lam)
        y_t = build_y(err_t, ref_t, K_P)
        return mu_total(omega_t, self.omega_hat + dt * self.omega_hat_dot, err_t, ref_t, y_t, K_P)

    def central_difference(self, h):
        return (self.mu_at(h) - self.mu_at(-h)) / (2.0 * h)

    def test_total_derivative_uses_plant_acceleration(self):
        np.testing.assert_allclose(self.central_difference(1e-5), self.analytic, atol=1e-6)

    def test_difference_error_is_second_order(self):
        coarse = np.linalg.norm(self.central_difference(2e-2) - self.analytic)
        fine = np.linalg.norm(self.central_difference(1e-2) - self.analytic)
        self.assertGreater(coarse, 1e-9)
        self.assertGreater(coarse / fine, 3.5)
        self.assertLess(coarse / fine, 4.5)
