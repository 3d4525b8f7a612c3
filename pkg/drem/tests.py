import numpy as np
from django.test import SimpleTestCase

from attmath.inertia import InertiaParams
from attmath.quaternion import IDENTITY, normalize
from drem.filters import DremState, drem_derivative, filtered_regressor
from drem.mixing import adjugate, det_underflows, extend, mix
from drem.monitor import DEFAULT_PE_THRESHOLD, pe_floor_monitor
from plant.dynamics import BodyState, plant_derivative
from sim.integrator import rk4_relaxed_finish, rk4_step
from sim.state import pack_symmetric, unpack_symmetric
from utils.constants import THETA_TRUE


def random_psd(rng, rank=6):
    A = rng.standard_normal((6, rank))
    return A @ A.T


class MixTests(SimpleTestCase):

    def setUp(self):
        self.rng = np.random.default_rng(8)

    def _state(self, N, M):
        state = DremState.initial(np.zeros(3), 5.0)
        state.N, state.M = N, M
        return state

    def test_identity_matrix(self):
        m = self.rng.standard_normal(6)
        lre = mix(self._state(np.eye(6), m), 1.0)
        np.testing.assert_allclose(lre.Y, m, atol=1e-15)
        self.assertAlmostEqual(lre.Delta, 1.0, places=14)

    def test_rank_deficient_matrix(self):
        N = random_psd(self.rng)
        N[2, :] = 0.0
        N[:, 2] = 0.0
        self.assertEqual(mix(self._state(N, self.rng.standard_normal(6)), 1e9).Delta, 0.0)

    def test_scalar_equations_recover_parameters(self):
        theta = np.array(THETA_TRUE)
        for _ in range(20):
            N = random_psd(self.rng)
            lre = mix(self._state(N, N @ theta), 1.0)
            np.testing.assert_allclose(lre.Y, lre.Delta * theta, rtol=1e-8)

    def test_adjugate_identity(self):
        for _ in range(20):
            N = random_psd(self.rng)
            det = np.linalg.det(N)
            np.testing.assert_allclose(adjugate(N) @ N, det * np.eye(6), atol=1e-8 * abs(det) * 6)
            m = self.rng.standard_normal(6)
            np.testing.assert_allclose(mix(self._state(N, m), 1.0).Y, adjugate(N) @ m, rtol=1e-8, atol=1e-10)

    def test_extension_inactive_at_start(self):
        state = DremState.initial(np.zeros(3), 5.0, chi0=np.arange(6.0))
        state.N = random_psd(self.rng)
        state.M = self.rng.standard_normal(6)
        lre = extend(state, mix(state, 1.0), 8.0)
        np.testing.assert_allclose(lre.Y_N, lre.Y, atol=1e-12)
        self.assertEqual(lre.Delta_N, lre.Delta)

    def test_no_excitation_no_regressor(self):
        state = DremState.initial(np.zeros(3), 5.0)
        lre = extend(state, mix(state, 1e9), 8.0)
        self.assertEqual(lre.Delta_N, 0.0)

    def test_underflow_flag_compares_delta_itself(self):
        N = 1e-3 * np.eye(6)
        self.assertTrue(det_underflows(1e-301, N))
        # k_I det N = 1e-295 is still representable, whatever k_I is
        self.assertFalse(det_underflows(1e-295, N))
        self.assertFalse(det_underflows(0.0, np.zeros((6, 6))))


class FilterTests(SimpleTestCase):

    def test_zero_state_and_inputs(self):
        state = DremState.initial(np.zeros(3), 5.0)
        d = drem_derivative(state, np.zeros(3), np.zeros(3), 5.0, 0.5, 0.0, np.zeros(6))
        for value in (d.omega_f, d.W_f, d.u_f, d.M, d.N, d.chi):
            self.assertFalse(np.any(value))
        self.assertEqual(d.Xi, 0.0)
        np.testing.assert_array_equal(filtered_regressor(state, np.zeros(3)), np.zeros((3, 6)))

    def test_constant_mixing_signal_closed_form(self):
        c, chi0 = 0.7, np.array([1.0, -2.0, 0.5, 0.0, 3.0, 1.0])
        x = np.append(chi0, 1.0)

        def derivative(x, t):
            state = DremState.initial(np.zeros(3), 5.0, chi0=chi0)
            state.chi, state.Xi = x[:6], x[6]
            d = drem_derivative(state, np.zeros(3), np.zeros(3), 5.0, 0.5, c, np.zeros(6))
            return np.append(d.chi, d.Xi)

        t, h = 0.0, 0.01
        for _ in range(500):
            x = rk4_step(x, t, h, derivative)
            t += h
        np.testing.assert_allclose(x[:6], chi0 * np.exp(-c * c * t), rtol=1e-9)
        self.assertAlmostEqual(x[6], np.exp(-c * c * t), places=10)

    def test_stiff_mixing_signal_keeps_extension_identity(self):
        # Delta = 20 with h = 0.01 puts h Delta^2 = 4 outside the RK4 stability region
        c, h = 20.0, 0.01
        theta = np.array(THETA_TRUE)
        chi0 = np.array([1.0, -2.0, 0.5, 0.0, 3.0, 1.0])

        def derivative(x, t):
            state = DremState.initial(np.zeros(3), 5.0, chi0=chi0)
            state.chi, state.Xi = x[:6], x[6]
            d = drem_derivative(state, np.zeros(3), np.zeros(3), 5.0, 0.5, c, c * theta)
            return np.append(d.chi, d.Xi)

        def field(x, t):
            return np.append(c * c * theta, 0.0), c * c

        plain = relaxed = np.append(chi0, 1.0)
        for k in range(50):
            plain = rk4_step(plain, k * h, h, derivative)
            previous = relaxed
            relaxed = rk4_relaxed_finish(relaxed, k * h, h, field, field(relaxed, k * h), np.arange(7))
            self.assertLessEqual(relaxed[6], previous[6])
            self.assertGreater(relaxed[6], 0.0)
            np.testing.assert_allclose(relaxed[:6] - theta, relaxed[6] * (chi0 - theta), rtol=1e-12, atol=1e-12)
        self.assertGreater(abs(plain[6]), 1.0)
        self.assertAlmostEqual(relaxed[6] / np.exp(-c * c * 50 * h), 1.0, places=12)


class ExtendedRegressorDynamicsTests(SimpleTestCase):
    """Open-loop plant driven by a smooth torque, filters integrated alongside."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        a, b = 5.0, 0.5
        inertia = InertiaParams(np.array(THETA_TRUE))
        theta = inertia.theta
        omega0 = np.array([0.05, -0.02, 0.03])
        m0 = np.full(6, 2.0)

        def torque(t):
            return np.array([np.sin(t), np.cos(0.7 * t), np.sin(1.3 * t + 0.4)])

        def unpack(x):
            state = DremState.initial(omega0, a)
            state.omega_f, state.W_f, state.u_f = x[7:10], x[10:28].reshape(3, 6), x[28:31]
            state.M, state.N = x[31:37], unpack_symmetric(x[37:58])
            return state

        def derivative(x, t):
            body = BodyState(x[:4], x[4:7])
            u = torque(t)
            q_dot, omega_dot = plant_derivative(body, u, np.zeros(3), inertia)
            d = drem_derivative(unpack(x), body.omega, u, a, b, 0.0, np.zeros(6))
            return np.concatenate([q_dot, omega_dot, d.omega_f, d.W_f.ravel(), d.u_f, d.M, pack_symmetric(d.N)])

        def project(x):
            x[:4] = normalize(x[:4])
            return x

        x = np.concatenate([IDENTITY, omega0, omega0 / a, np.zeros(18), np.zeros(3), m0, np.zeros(21)])
        t, h = 0.0, 0.01
        times, residual_29, residual_33, min_eig = [], [], [], []
        for _ in range(1000):
            state = unpack(x)
            omega_f_dot = x[4:7] - a * state.omega_f
            W_a = filtered_regressor(state, omega_f_dot)
            times.append(t)
            residual_29.append(np.linalg.norm(state.u_f - W_a @ theta))
            residual_33.append(np.linalg.norm(state.M - state.N @ theta))
            min_eig.append(np.linalg.eigvalsh(state.N)[0])
            x = rk4_step(x, t, h, derivative, project)
            t += h
        cls.b = b
        cls.times = np.array(times)
        cls.residual_29 = np.array(residual_29)
        cls.residual_33 = np.array(residual_33)
        cls.min_eig = np.array(min_eig)

    def test_filtered_identity_holds(self):
        after = self.times >= 1.0
        self.assertLess(self.residual_29[after].max(), 1e-6)

    def test_extended_residual_decays_at_filter_rate(self):
        window = self.times <= 8.0
        slope = np.polyfit(self.times[window], np.log(self.residual_33[window]), 1)[0]
        self.assertLess(abs(slope + self.b), 0.1 * self.b)

    def test_extended_matrix_stays_psd(self):
        self.assertGreaterEqual(self.min_eig.min(), -1e-10)


class PeFloorMonitorTests(SimpleTestCase):

    def test_no_excitation(self):
        t = np.linspace(0.0, 10.0, 101)
        self.assertFalse(pe_floor_monitor(t, np.zeros_like(t)).detected)

    def test_synthetic_crossing(self):
        k_N, eps = 8.0, 1e-6
        t = np.linspace(0.0, 1e-5, 100001)
        floor = pe_floor_monitor(t, k_N * (1.0 - np.exp(-t)), eps)
        crossing = -np.log(1.0 - eps / k_N)
        self.assertTrue(floor.detected)
        self.assertLessEqual(abs(floor.T_s - crossing), t[1] - t[0])
        self.assertAlmostEqual(floor.hbar, k_N * (1.0 - np.exp(-floor.T_s)), places=15)

    def test_default_threshold_ignores_build_up_of_n(self):
        # Delta_N growing like t^10 passes 1e-6 near 1.6 s and 1e-2 near 4 s
        t = np.linspace(0.0, 10.0, 1001)
        Delta_N = 1e-6 * (t / 1.6) ** 10
        floor = pe_floor_monitor(t, Delta_N)
        self.assertEqual(DEFAULT_PE_THRESHOLD, 1e-2)
        self.assertAlmostEqual(floor.T_s, 1.6 * 1e4 ** 0.1, delta=0.011)
        self.assertGreater(floor.T_s, 2.0)

    def test_signal_that_falls_back_is_not_settled_until_last_dip(self):
        t = np.arange(6.0)
        values = np.array([0.0, 1.0, 0.0, 2.0, 3.0, 2.5])
        floor = pe_floor_monitor(t, values, 0.5)
        self.assertEqual(floor.T_s, 3.0)
        self.assertEqual(floor.hbar, 2.0)
