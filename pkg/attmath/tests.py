import numpy as np
from django.test import SimpleTestCase

from attmath.inertia import InertiaParams, lmap, lmap_batch, omega_bar, reconstruct
from attmath.quaternion import (
    IDENTITY, conjugate, kinematics_matrix, quat_derivative, quat_error,
    quat_multiply, random_unit_quaternion, rotmat, skew, skew_batch,
)
from utils.constants import THETA_TRUE
from utils.exceptions import SingularInertiaError


class SkewTests(SimpleTestCase):

    def test_known_matrix(self):
        expected = np.array([[0, -3, 2], [3, 0, -1], [-2, 1, 0]], dtype=float)
        np.testing.assert_array_equal(skew(np.array([1.0, 2.0, 3.0])), expected)

    def test_zero_and_self_cross(self):
        np.testing.assert_array_equal(skew(np.zeros(3)), np.zeros((3, 3)))
        x = np.array([0.3, -0.7, 1.1])
        np.testing.assert_allclose(skew(x) @ x, np.zeros(3), atol=1e-15)

    def test_matches_cross_product_and_batch(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((20, 3))
        Y = rng.standard_normal((20, 3))
        batch = skew_batch(X)
        for k in range(20):
            np.testing.assert_allclose(skew(X[k]) @ Y[k], np.cross(X[k], Y[k]), atol=1e-14)
            np.testing.assert_array_equal(batch[k], skew(X[k]))
            np.testing.assert_array_equal(batch[k], -batch[k].T)


class LmapTests(SimpleTestCase):

    def test_known_layout(self):
        expected = np.array([
            [1, 0, 0, 0, 3, 2],
            [0, 2, 0, 3, 0, 1],
            [0, 0, 3, 2, 1, 0],
        ], dtype=float)
        np.testing.assert_array_equal(lmap(np.array([1.0, 2.0, 3.0])), expected)

    def test_first_column_of_inertia(self):
        theta = np.array(THETA_TRUE)
        np.testing.assert_allclose(lmap(np.array([1.0, 0.0, 0.0])) @ theta, [20.0, 1.2, 0.9])

    def test_regression_identity_on_random_samples(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((50, 3))
        batch = lmap_batch(X)
        for k in range(50):
            theta = rng.standard_normal(6)
            np.testing.assert_allclose(lmap(X[k]) @ theta, reconstruct(theta) @ X[k], atol=1e-13)
            np.testing.assert_array_equal(batch[k], lmap(X[k]))

    def test_omega_bar_jacobian_is_lmap_transpose(self):
        w = np.array([0.4, -1.2, 0.7])
        h = 1e-6
        jac = np.zeros((6, 3))
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            jac[:, i] = (omega_bar(w + e) - omega_bar(w - e)) / (2 * h)
        np.testing.assert_allclose(jac, lmap(w).T, atol=1e-8)
        np.testing.assert_allclose(omega_bar(np.array([1.0, 2.0, 3.0])), [0.5, 2, 4.5, 6, 3, 2])


class InertiaParamsTests(SimpleTestCase):

    def test_true_inertia_is_positive_definite(self):
        params = InertiaParams(np.array(THETA_TRUE))
        self.assertGreater(params.min_eigenvalue, 0.0)
        np.testing.assert_allclose(params.matrix, params.matrix.T)
        np.testing.assert_allclose(params.matrix @ params.inverse, np.eye(3), atol=1e-14)

    def test_indefinite_inertia_rejected(self):
        with self.assertRaises(SingularInertiaError):
            InertiaParams(np.array([1.0, 1.0, 1.0, 5.0, 0.0, 0.0]))

    def test_near_singular_inertia_rejected(self):
        with self.assertRaises(SingularInertiaError):
            InertiaParams(np.array([1.0, 1.0, 1e-13, 0.0, 0.0, 0.0]))


class QuaternionTests(SimpleTestCase):

    def setUp(self):
        self.rng = np.random.default_rng(3)

    def test_identity_and_inverse_elements(self):
        a = random_unit_quaternion(self.rng)
        np.testing.assert_allclose(quat_multiply(a, IDENTITY), a, atol=1e-15)
        product = quat_multiply(a, conjugate(a))
        self.assertLessEqual(np.linalg.norm(product[:3]), 1e-9)
        self.assertAlmostEqual(abs(product[3]), 1.0, places=12)

    def test_composition_matches_rotation_product(self):
        for _ in range(100):
            a = random_unit_quaternion(self.rng)
            b = random_unit_quaternion(self.rng)
            np.testing.assert_allclose(rotmat(quat_multiply(a, b)), rotmat(b) @ rotmat(a), atol=1e-9)

    def test_error_quaternion_components(self):
        q = random_unit_quaternion(self.rng)
        q_r = random_unit_quaternion(self.rng)
        q_e = quat_error(q, q_r)
        self.assertAlmostEqual(q_e[3], q_r[3] * q[3] + q_r[:3] @ q[:3], places=14)
        np.testing.assert_allclose(q_e, quat_multiply(conjugate(q_r), q), atol=1e-14)
        self.assertAlmostEqual(np.linalg.norm(q_e), 1.0, places=14)

    def test_error_of_identical_and_antipodal_frames(self):
        q = random_unit_quaternion(self.rng)
        np.testing.assert_allclose(quat_error(q, q), IDENTITY, atol=1e-15)
        np.testing.assert_allclose(quat_error(-q, q), [0, 0, 0, -1], atol=1e-15)

    def test_error_rotation_maps_reference_to_body(self):
        q = random_unit_quaternion(self.rng)
        q_r = random_unit_quaternion(self.rng)
        np.testing.assert_allclose(rotmat(quat_error(q, q_r)), rotmat(q) @ rotmat(q_r).T, atol=1e-12)

    def test_rotation_matrix_properties(self):
        np.testing.assert_allclose(rotmat(IDENTITY), np.eye(3))
        np.testing.assert_allclose(rotmat(-IDENTITY), np.eye(3))
        q = random_unit_quaternion(self.rng)
        C = rotmat(q)
        np.testing.assert_allclose(C.T @ C, np.eye(3), atol=1e-10)
        self.assertAlmostEqual(np.linalg.det(C), 1.0, places=12)
        self.assertAlmostEqual(np.linalg.norm(C, 2), 1.0, places=12)

    def test_rotation_derivative_relation(self):
        # C' = -S(omega_e) C when q_e' follows the kinematics with omega_e
        q = random_unit_quaternion(self.rng)
        omega = self.rng.standard_normal(3)
        h = 1e-6
        dq = quat_derivative(q, omega)
        C_dot = (rotmat(q + h * dq) - rotmat(q - h * dq)) / (2 * h)
        np.testing.assert_allclose(C_dot, -skew(omega) @ rotmat(q), atol=1e-7)

    def test_kinematics_matrix(self):
        np.testing.assert_allclose(kinematics_matrix(IDENTITY), 0.5 * np.eye(3))
        np.testing.assert_allclose(kinematics_matrix(-IDENTITY), -0.5 * np.eye(3))

    def test_long_product_chain_stays_normalized(self):
        q = IDENTITY.copy()
        step = random_unit_quaternion(self.rng)
        for _ in range(100000):
            q = quat_multiply(q, step)
        self.assertLess(abs(np.linalg.norm(q) - 1.0), 1e-9)
