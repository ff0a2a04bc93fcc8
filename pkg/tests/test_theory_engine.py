"""Tests for link functions, prox, quadrature, the fixed-point solver and the frontier."""

import os
import sys
import tempfile
import unittest

import numpy as np
from scipy.optimize import minimize_scalar

# Add parent directory to path so we can import modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from engine.errors import ConfigurationError, FrontierError, InvalidParameterError, OutOfRegionError
from engine.theory_engine import (
    TheoryInputs,
    build_frontier,
    build_quadrature,
    exists_mle,
    frontier_cache_path,
    frontier_from_knots,
    load_frontier,
    load_or_build_frontier,
    mc_separability_prob,
    prox,
    rho_family,
    save_frontier,
    solve_fixed_point,
    system_residuals,
)


class TestLinkFunctions(unittest.TestCase):

    def test_values_at_zero(self):
        rho, d1, d2 = rho_family(0.0)
        self.assertAlmostEqual(rho, np.log(2.0), places=15)
        self.assertEqual(d1, 0.5)
        self.assertEqual(d2, 0.25)

    def test_tails_and_known_value(self):
        rho, d1, d2 = rho_family(-50.0)
        for value in (rho, d1, d2):
            self.assertAlmostEqual(value / np.exp(-50.0), 1.0, places=6)
        self.assertAlmostEqual(rho_family(3.0)[1], 0.952574, places=6)

    def test_vectorized(self):
        rho, d1, d2 = rho_family(np.array([-1.0, 0.0, 1.0]))
        np.testing.assert_allclose(d2, d1 * (1 - d1))
        self.assertEqual(rho.shape, (3,))


class TestProx(unittest.TestCase):

    def test_zero_lambda_is_identity(self):
        self.assertEqual(prox(0.0, 1.7), 1.7)

    def test_far_left_tail(self):
        self.assertAlmostEqual(prox(2.0, -60.0), -60.0, places=10)

    def test_matches_scalar_minimization(self):
        oracle = minimize_scalar(
            lambda t: np.logaddexp(0.0, t) + 0.5 * (t - 1.0) ** 2,
            bounds=(-10, 10),
            method="bounded",
            options={"xatol": 1e-12},
        ).x
        self.assertAlmostEqual(prox(1.0, 1.0), oracle, delta=1e-8)

    def test_stationarity_and_monotonicity(self):
        rng = np.random.default_rng(0)
        z = rng.uniform(-10, 10, 1000)
        for lam in (0.1, 1.0, 5.0):
            t = prox(lam, z)
            _, d1, _ = rho_family(t)
            self.assertLessEqual(np.max(np.abs(lam * d1 + t - z)), 1e-12)
            self.assertTrue(np.all(t <= z))
            order = np.argsort(z)
            self.assertTrue(np.all(np.diff(t[order]) >= 0))

    def test_negative_lambda_rejected(self):
        with self.assertRaises(InvalidParameterError):
            prox(-1.0, 0.0)


class TestQuadrature(unittest.TestCase):

    def test_moments(self):
        grid = build_quadrature(40)
        self.assertAlmostEqual(grid.weights.sum(), 1.0, places=12)
        moments = [
            (np.ones_like(grid.z1), 1.0),
            (grid.z1, 0.0),
            (grid.z2, 0.0),
            (grid.z1 ** 2, 1.0),
            (grid.z2 ** 2, 1.0),
            (grid.z1 * grid.z2, 0.0),
        ]
        for values, expected in moments:
            self.assertAlmostEqual(grid.expect(values), expected, delta=1e-10)

    def test_order_below_minimum(self):
        with self.assertRaises(ConfigurationError):
            build_quadrature(7)


class TestFixedPoint(unittest.TestCase):

    POINTS = [(0.05, 0.1), (0.1, 1.0), (0.2, np.sqrt(5.0))]

    def test_residuals_and_alpha_above_one(self):
        for kappa, gamma in self.POINTS:
            fp = solve_fixed_point(TheoryInputs(kappa, gamma))
            self.assertLessEqual(np.max(np.abs(fp.residuals)), 1e-6)
            self.assertGreater(fp.alpha_star, 1.0)
            self.assertGreater(fp.sigma_star, 0.0)
            self.assertGreater(fp.lambda_star, 0.0)

    def test_reference_values(self):
        fp = solve_fixed_point(TheoryInputs(0.3, np.sqrt(2.0)))
        self.assertAlmostEqual(fp.alpha_star, 1.8408, delta=1e-3)
        self.assertAlmostEqual(fp.sigma_star, 5.5061, delta=1e-3)
        self.assertAlmostEqual(fp.lambda_star, 5.0054, delta=1e-3)

    def test_near_classical_alpha(self):
        fp = solve_fixed_point(TheoryInputs(0.05, 0.1))
        self.assertLess(fp.alpha_star, 1.2)

    def test_perturbed_start_reaches_same_solution(self):
        inputs = TheoryInputs(0.2, np.sqrt(5.0))
        fp = solve_fixed_point(inputs)
        start = 1.5 * np.array([fp.alpha_star, fp.sigma_star, fp.lambda_star])
        again = solve_fixed_point(inputs, start=start)
        np.testing.assert_allclose(
            [again.alpha_star, again.sigma_star, again.lambda_star],
            [fp.alpha_star, fp.sigma_star, fp.lambda_star],
            atol=1e-4,
        )

    def test_refined_quadrature(self):
        inputs = TheoryInputs(0.2, np.sqrt(5.0))
        fp = solve_fixed_point(inputs)
        residuals = system_residuals(fp.alpha_star, fp.sigma_star, fp.lambda_star, inputs, build_quadrature(80))
        self.assertLessEqual(np.max(np.abs(residuals)), 1e-5)

    def test_memoized(self):
        a = solve_fixed_point(TheoryInputs(0.1, 1.0))
        b = solve_fixed_point(TheoryInputs(0.1 + 1e-9, 1.0))
        self.assertIs(a, b)

    def test_small_kappa_recovers_classical_limit(self):
        fp = solve_fixed_point(TheoryInputs(0.01, 0.0))
        self.assertAlmostEqual(fp.sigma_star, 2.0, delta=0.05)
        self.assertAlmostEqual(fp.lrt_factor, 1.0, delta=0.05)

    def test_continuity_in_gamma(self):
        at_zero = solve_fixed_point(TheoryInputs(0.1, 0.0))
        near_zero = solve_fixed_point(TheoryInputs(0.1, 1e-3))
        self.assertAlmostEqual(at_zero.sigma_star, near_zero.sigma_star, delta=1e-3)
        self.assertAlmostEqual(at_zero.lambda_star, near_zero.lambda_star, delta=1e-3)

    def test_quadrature_sanity_at_zero_signal(self):
        grid = build_quadrature(40)
        _, d1, _ = rho_family(0.0 * grid.z1)
        self.assertAlmostEqual(grid.expect(2.0 * d1), 1.0, places=12)

    def test_inputs_validation(self):
        with self.assertRaises(InvalidParameterError):
            TheoryInputs(1.0, 1.0)
        with self.assertRaises(InvalidParameterError):
            TheoryInputs(0.2, -0.1)

    def test_out_of_region(self):
        curve = frontier_from_knots([0.1, 0.2, 0.3], [8.0, 4.0, 2.0], n=100, reps=10)
        with self.assertRaises(OutOfRegionError):
            solve_fixed_point(TheoryInputs(0.2, 100.0), curve=curve)


class TestFrontier(unittest.TestCase):

    def test_separability_probability_regions(self):
        low = mc_separability_prob(0.3, 0.0, n=200, reps=20, rng=1)
        high = mc_separability_prob(0.6, 0.0, n=200, reps=20, rng=1)
        self.assertLessEqual(low, 0.1)
        self.assertGreaterEqual(high, 0.9)

    def test_inside_region_every_trial_is_decided(self):
        with self.assertNoLogs("hdlogit", level="WARNING"):
            prob = mc_separability_prob(0.2, 1.0, n=500, reps=6, rng=4)
        self.assertEqual(prob, 0.0)

    def test_single_rep_is_binary(self):
        self.assertIn(mc_separability_prob(0.2, 1.0, n=100, reps=1, rng=3), (0.0, 1.0))
        with self.assertRaises(InvalidParameterError):
            mc_separability_prob(0.2, 1.0, n=100, reps=0, rng=3)

    def test_curve_interpolation_and_domain(self):
        curve = frontier_from_knots([0.1, 0.3], [6.0, 2.0], n=100, reps=10)
        self.assertAlmostEqual(curve(0.2), 4.0)
        with self.assertRaises(FrontierError):
            curve(0.4)

    def test_isotonic_clip_makes_curve_strictly_decreasing(self):
        curve = frontier_from_knots([0.1, 0.2, 0.3, 0.4], [5.0, 5.5, 3.0, 3.0], n=100, reps=10)
        self.assertTrue(np.all(np.diff(curve.gammas) < 0))

    def test_exists_mle_is_strict(self):
        curve = frontier_from_knots([0.1, 0.3], [6.0, 2.0], n=100, reps=10)
        self.assertTrue(exists_mle(TheoryInputs(0.2, 3.9), curve))
        self.assertFalse(exists_mle(TheoryInputs(0.2, curve(0.2)), curve))
        self.assertFalse(exists_mle(TheoryInputs(0.2, 100.0), curve))

    def test_build_is_deterministic_and_cacheable(self):
        kappas = [0.2, 0.3]
        first = build_frontier(kappas, n=100, reps=8, rng=5)
        second = build_frontier(kappas, n=100, reps=8, rng=5)
        np.testing.assert_array_equal(first.gammas, second.gammas)
        self.assertTrue(np.all(np.diff(first.gammas) < 0) or first.gammas[-1] == 0.0)

        with tempfile.TemporaryDirectory() as tmp:
            path = save_frontier(first, os.path.join(tmp, "curve.json"))
            loaded = load_frontier(path)
            np.testing.assert_array_equal(loaded.kappas, first.kappas)
            np.testing.assert_array_equal(loaded.gammas, first.gammas)
            self.assertEqual(loaded.seed, 5)

    def test_load_or_build_uses_cache(self):
        with tempfile.TemporaryDirectory() as tmp:
            built = load_or_build_frontier(tmp, kappas=[0.3], n=60, reps=4, seed=2, threads=1)
            path = frontier_cache_path(tmp, [0.3], 60, 4, 2)
            self.assertTrue(path.exists())
            cached = load_or_build_frontier(tmp, kappas=[0.3], n=60, reps=4, seed=2, threads=1)
            np.testing.assert_array_equal(cached.gammas, built.gammas)

    def test_bad_grid(self):
        with self.assertRaises(InvalidParameterError):
            build_frontier([0.6], n=100, reps=2, rng=0)

    def test_rejects_wrong_schema(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write('{"schema": "other", "knots": []}')
            with self.assertRaises(FrontierError):
                load_frontier(path)


if __name__ == '__main__':
    unittest.main()
