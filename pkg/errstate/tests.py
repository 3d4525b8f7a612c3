import numpy as np
from django.test import SimpleTestCase

from attmath.quaternion import IDENTITY, normalize
from errstate.barrier import AefParams, barrier_value, gibbs_vector, log_barrier_gap, quadratic_bounds
from errstate.tracking import initial_slope, make_tracking_error
from plant.dynamics import BodyState
from plant.reference import reference_at
from utils.constants import Q0_VECTOR
from utils.exceptions import BarrierBlowupError, PermissibleSetError


def case_attitude(case: int) -> np.ndarray:
    qv = np.array(Q0_VECTOR)
    q4 = np.sqrt(1.0 - qv @ qv)
    q = np.append(qv, q4)
    return q if case == 1 else -q


class TrackingErrorTests(SimpleTestCase):

    def test_matching_body_and_reference(self):
        q = normalize(np.array([0.1, 0.2, -0.3, 0.9]))
        ref = reference_at(0.0, q_r=q)
        err = make_tracking_error(BodyState(q, ref.omega_r.copy()), ref, 0.1)
        np.testing.assert_allclose(err.q_e, IDENTITY, atol=1e-15)
        np.testing.assert_allclose(err.omega_e, np.zeros(3), atol=1e-15)
        np.testing.assert_allclose(err.s, np.zeros(3), atol=1e-15)

    def test_filtered_error_definition(self):
        ref = reference_at(2.0, q_r=normalize(np.array([0.0, 0.1, 0.0, 1.0])))
        body = BodyState(normalize(np.array([0.3, -0.1, 0.2, 0.8])), np.array([0.2, 0.1, -0.3]))
        err = make_tracking_error(body, ref, -0.1)
        np.testing.assert_array_equal(err.s, err.omega_e + err.lambda_slope * err.q_ev)
        np.testing.assert_allclose(err.omega_e, body.omega - err.C @ ref.omega_r)

    def test_case_signs(self):
        for case, sign in ((1, 1.0), (2, -1.0)):
            err = make_tracking_error(BodyState(case_attitude(case), np.zeros(3)), reference_at(0.0), 0.0)
            self.assertEqual(np.sign(err.q_e4), sign)
            self.assertEqual(initial_slope(err.q_e, 0.1), 0.1 * sign)

    def test_slope_rejects_points_outside_permissible_set(self):
        with self.assertRaises(PermissibleSetError):
            initial_slope(np.array([1.0, 0.0, 0.0, 1e-8]), 0.1)


class BarrierTests(SimpleTestCase):

    def test_values(self):
        self.assertEqual(barrier_value(IDENTITY, 0.5), 0.0)
        self.assertEqual(barrier_value(-IDENTITY, 0.5), 0.0)
        q = np.array([np.sqrt(0.75), 0.0, 0.0, 0.5])
        self.assertAlmostEqual(barrier_value(q, 0.5), 0.693147, places=6)
        self.assertEqual(barrier_value(q, 0.5), barrier_value(-q, 0.5))

    def test_strictly_decreasing_in_scalar_part(self):
        values = [barrier_value(np.array([np.sqrt(1 - x * x), 0, 0, x]), 1.0) for x in np.linspace(0.01, 1.0, 200)]
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_blowup_near_zero_scalar_part(self):
        q = np.array([1.0, 0.0, 0.0, 1e-13])
        with self.assertRaises(BarrierBlowupError):
            barrier_value(q, 0.5)
        with self.assertRaises(BarrierBlowupError):
            gibbs_vector(q)

    def test_gibbs_vector(self):
        np.testing.assert_array_equal(gibbs_vector(IDENTITY), np.zeros(3))
        q = np.array([0.5, 0.0, 0.0, np.sqrt(0.75)])
        np.testing.assert_allclose(gibbs_vector(q), [0.57735, 0, 0], atol=1e-5)
        np.testing.assert_allclose(gibbs_vector(q), gibbs_vector(-q))

    def test_aef_params_positive(self):
        with self.assertRaises(ValueError):
            AefParams(alpha=0.0, beta=0.1)


class BarrierBoundTests(SimpleTestCase):

    def test_gap_examples(self):
        self.assertEqual(log_barrier_gap(1.0), 0.0)
        self.assertAlmostEqual(log_barrier_gap(0.5), 0.113706, places=6)
        self.assertEqual(log_barrier_gap(-0.5), log_barrier_gap(0.5))

    def test_gap_grid(self):
        magnitudes = np.concatenate([np.logspace(-3, 0, 250), np.linspace(1e-3, 1.0, 250)])
        grid = np.concatenate([magnitudes, -magnitudes])
        self.assertEqual(grid.size, 1000)
        gaps = np.array([log_barrier_gap(x) for x in grid])
        self.assertGreaterEqual(gaps.min(), -1e-12)

    def test_quadratic_bound_examples(self):
        _, upper = quadratic_bounds(0.5, 0.5)
        self.assertAlmostEqual(upper, 0.924196, places=6)
        _, upper = quadratic_bounds(0.999, 0.7)
        self.assertAlmostEqual(upper, 0.7, places=2)
        for delta in (0.05, 0.5, 0.95):
            lower, upper = quadratic_bounds(delta, 1.0)
            self.assertGreater(upper, lower)

    def test_sandwich_grid(self):
        for delta in np.arange(0.05, 0.951, 0.05):
            for alpha in (0.1, 0.5, 1.0, 5.0):
                lower, upper = quadratic_bounds(delta, alpha)
                x = np.linspace(delta, 1.0, 1000)
                v_q = -alpha * np.log(x ** 2)
                self.assertGreaterEqual((v_q - lower * (1 - x ** 2)).min(), -1e-12)
                self.assertGreaterEqual((upper * (1 - x ** 2) - v_q).min(), -1e-12)
