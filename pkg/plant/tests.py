import numpy as np
from django.test import SimpleTestCase

from attmath.inertia import InertiaParams
from attmath.quaternion import IDENTITY, normalize, rotmat
from plant.dynamics import BodyState, kinetic_energy, plant_derivative
from plant.perturbations import (
    DISTURBANCE_BOUND, NoiseConfig, disturbance_at, draw_noise, measure, perturb_axis,
)
from plant.reference import reference_at, reference_profile
from sim.integrator import rk4_step
from utils.constants import THETA_TRUE


class PlantDerivativeTests(SimpleTestCase):

    def setUp(self):
        self.inertia = InertiaParams(np.array(THETA_TRUE))

    def test_equilibrium(self):
        state = BodyState(IDENTITY.copy(), np.zeros(3))
        q_dot, omega_dot = plant_derivative(state, np.zeros(3), np.zeros(3), self.inertia)
        np.testing.assert_array_equal(q_dot, np.zeros(4))
        np.testing.assert_array_equal(omega_dot, np.zeros(3))

    def test_principal_axis_spin(self):
        diagonal = InertiaParams(np.array([20.0, 17.0, 15.0, 0.0, 0.0, 0.0]))
        state = BodyState(IDENTITY.copy(), np.array([0.1, 0.0, 0.0]))
        _, omega_dot = plant_derivative(state, np.zeros(3), np.zeros(3), diagonal)
        np.testing.assert_allclose(omega_dot, np.zeros(3), atol=1e-16)

    def test_torque_free_motion_conserves_energy_and_momentum(self):
        inertia = self.inertia

        def derivative(x, t):
            q_dot, omega_dot = plant_derivative(BodyState(x[:4], x[4:]), np.zeros(3), np.zeros(3), inertia)
            return np.concatenate([q_dot, omega_dot])

        def project(x):
            x[:4] = normalize(x[:4])
            return x

        x = np.concatenate([normalize(np.array([0.2, -0.1, 0.4, 0.9])), [0.1, -0.05, 0.08]])
        energy0 = kinetic_energy(x[4:], inertia)
        momentum0 = rotmat(x[:4]).T @ inertia.matrix @ x[4:]
        t, h = 0.0, 0.01
        for _ in range(1000):
            x = rk4_step(x, t, h, derivative, project)
            t += h
        self.assertLess(abs(kinetic_energy(x[4:], inertia) - energy0), 1e-8)
        momentum = rotmat(x[:4]).T @ inertia.matrix @ x[4:]
        self.assertLess(np.linalg.norm(momentum - momentum0), 1e-7)
        self.assertLess(abs(np.linalg.norm(inertia.matrix @ x[4:]) - np.linalg.norm(momentum0)), 1e-7)


class ReferenceTests(SimpleTestCase):

    def test_starts_at_rest(self):
        ref = reference_at(0.0)
        np.testing.assert_allclose(ref.omega_r, np.zeros(3), atol=1e-16)
        np.testing.assert_array_equal(ref.q_r, IDENTITY)

    def test_derivatives_match_central_differences(self):
        h = 1e-4
        for t in (1.0, 5.0, 20.0):
            f_plus, fd_plus, _ = reference_profile(t + h)
            f_minus, fd_minus, _ = reference_profile(t - h)
            _, f_d, f_dd = reference_profile(t)
            self.assertLess(abs(f_d - (f_plus - f_minus) / (2 * h)), 1e-6)
            self.assertLess(abs(f_dd - (fd_plus - fd_minus) / (2 * h)), 1e-6)

    def test_same_profile_on_every_axis(self):
        ref = reference_at(3.7)
        self.assertEqual(len(set(ref.omega_r.tolist())), 1)
        self.assertEqual(len(set(ref.omega_r_ddot.tolist())), 1)

    def test_excitation_cutoff_freezes_rate(self):
        frozen = reference_at(8.0).omega_r
        late = reference_at(15.0, excitation_cutoff=8.0)
        np.testing.assert_array_equal(late.omega_r, frozen)
        np.testing.assert_array_equal(late.omega_r_dot, np.zeros(3))
        np.testing.assert_array_equal(late.omega_r_ddot, np.zeros(3))
        early = reference_at(5.0, excitation_cutoff=8.0)
        np.testing.assert_array_equal(early.omega_r, reference_at(5.0).omega_r)


class DisturbanceTests(SimpleTestCase):

    def test_value_at_zero(self):
        np.testing.assert_allclose(disturbance_at(0.0), [-7e-4, 1.8e-3, 5e-4], atol=1e-18)

    def test_bounded(self):
        for t in np.linspace(0.0, 500.0, 5001):
            self.assertTrue(np.all(np.abs(disturbance_at(t)) <= DISTURBANCE_BOUND + 1e-18))


class MeasurementTests(SimpleTestCase):

    def setUp(self):
        self.state = BodyState(normalize(np.array([0.33, -0.3, -0.62, 0.6455])), np.array([0.1, -0.2, 0.05]))

    def test_silent_noise_is_identity(self):
        rng = np.random.default_rng(0)
        out = measure(self.state, NoiseConfig(cone_half_angle=0.0, gyro_std=0.0), rng)
        np.testing.assert_array_equal(out.q, self.state.q)
        np.testing.assert_array_equal(out.omega, self.state.omega)
        self.assertIs(measure(self.state, None, rng), self.state)

    def test_zero_rotation_left_unperturbed(self):
        state = BodyState(IDENTITY.copy(), np.zeros(3))
        out = measure(state, NoiseConfig(gyro_std=0.0), np.random.default_rng(1))
        np.testing.assert_array_equal(out.q, IDENTITY)

    def test_cone_and_gyro_statistics(self):
        config = NoiseConfig(seed=7)
        rng = config.make_rng()
        n = self.state.q[:3] / np.linalg.norm(self.state.q[:3])
        draws = 100000
        worst = 0.0
        gyro = np.empty((draws, 3))
        for k in range(draws):
            sample = draw_noise(config, rng)
            axis = perturb_axis(n, sample)
            worst = max(worst, np.degrees(np.arccos(np.clip(axis @ n, -1.0, 1.0))))
            gyro[k] = sample.gyro
        self.assertLessEqual(worst, 0.1 + 1e-5)
        std = gyro.std()
        self.assertGreaterEqual(std, 0.9e-3)
        self.assertLessEqual(std, 1.1e-3)

    def test_measured_quaternion_is_unit_and_keeps_eigenangle(self):
        out = measure(self.state, NoiseConfig(seed=3), NoiseConfig(seed=3).make_rng())
        self.assertAlmostEqual(np.linalg.norm(out.q), 1.0, places=12)
        self.assertAlmostEqual(out.q[3], self.state.q[3], places=12)

    def test_seeded_streams_are_reproducible(self):
        config = NoiseConfig(seed=11)
        rng_a, rng_b = config.make_rng(), config.make_rng()
        a = np.array([draw_noise(config, rng_a).gyro for _ in range(5)])
        b = np.array([draw_noise(config, rng_b).gyro for _ in range(5)])
        np.testing.assert_array_equal(a, b)
