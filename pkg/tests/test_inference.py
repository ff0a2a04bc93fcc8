"""Tests for tau estimation, adjusted intervals, p-values and the report."""

import os
import sys
import tempfile
import unittest

import numpy as np
from scipy.stats import chi2

# Add parent directory to path so we can import modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from engine.errors import InvalidParameterError, NonConvergenceError, RankDeficientError
from engine.gauss_designs import build_ar1, conditional_sd, sample_design
from engine.inference import (
    REPORT_COLUMNS,
    adjusted_ci,
    adjusted_ci_direction,
    build_report,
    estimate_rho_ar1,
    estimate_tau_rss,
    estimate_tau_rss_all,
    lrt_pvalue,
    read_report,
    standardize_T,
    standardize_multi,
    t_pvalue,
    write_report,
)
from engine.logistic_core import FitResult, fit_mle, sample_labels
from engine.theory_engine import TheoryInputs, solve_fixed_point


class TestTauEstimates(unittest.TestCase):

    def test_rss_single_and_all_agree(self):
        X = np.random.default_rng(0).standard_normal((200, 10))
        all_tau = estimate_tau_rss_all(X)
        for j in (0, 4, 9):
            self.assertAlmostEqual(estimate_tau_rss(X, j), all_tau[j], places=10)

    def test_rss_identity_mean_close_to_one(self):
        X = np.random.default_rng(1).standard_normal((2000, 400))
        tau = estimate_tau_rss_all(X)
        self.assertAlmostEqual(np.mean(tau ** 2), 1.0, delta=0.03)

    def test_rss_ar1_interior(self):
        spec = build_ar1(50, 0.5)
        X = sample_design(4000, spec, 2).x
        self.assertAlmostEqual(estimate_tau_rss(X, 25) ** 2, 0.6, delta=0.05)

    def test_collinear_columns(self):
        X = np.random.default_rng(3).standard_normal((50, 4))
        X[:, 3] = X[:, 1]
        with self.assertRaises(RankDeficientError):
            estimate_tau_rss(X, 1)
        with self.assertRaises(RankDeficientError):
            estimate_tau_rss_all(X)

    def test_needs_more_rows_than_columns(self):
        with self.assertRaises(InvalidParameterError):
            estimate_tau_rss(np.ones((3, 3)), 0)

    def test_ar1_estimates(self):
        X = sample_design(2000, build_ar1(20, 0.5), 4).x
        est = estimate_rho_ar1(X)
        self.assertAlmostEqual(est.rho, 0.5, delta=0.03)
        self.assertAlmostEqual(est.scale, 1.0, delta=0.03)
        np.testing.assert_allclose(est.tau, conditional_sd(build_ar1(20, 0.5)), atol=0.05)

        independent = np.random.default_rng(5).standard_normal((2000, 20))
        self.assertAlmostEqual(estimate_rho_ar1(independent).rho, 0.0, delta=0.03)

    def test_ar1_single_column(self):
        with self.assertRaises(InvalidParameterError):
            estimate_rho_ar1(np.ones((10, 1)))


class TestIntervalsAndPValues(unittest.TestCase):

    def test_adjusted_ci_example(self):
        lo, hi = adjusted_ci(0.0, 1.0, 1.0, 1.0, 4, 0.95)
        self.assertAlmostEqual(lo, -0.979982, places=6)
        self.assertAlmostEqual(hi, 0.979982, places=6)

    def test_degenerate_and_midpoint(self):
        lo, hi = adjusted_ci(0.6, 1.5, 0.0, 1.0, 100, 0.9)
        self.assertAlmostEqual(lo, 0.4)
        self.assertAlmostEqual(hi, 0.4)

        b = np.array([-1.0, 0.2, 3.0])
        lo, hi = adjusted_ci(b, 1.3, 2.0, np.array([0.5, 1.0, 2.0]), 400, 0.95)
        np.testing.assert_allclose(0.5 * (lo + hi), b / 1.3)
        self.assertTrue(np.all(lo <= b / 1.3) and np.all(b / 1.3 <= hi))

    def test_adjusted_ci_validation(self):
        with self.assertRaises(InvalidParameterError):
            adjusted_ci(0.0, 0.0, 1.0, 1.0, 4, 0.95)
        with self.assertRaises(InvalidParameterError):
            adjusted_ci(0.0, 1.0, 1.0, 1.0, 4, 1.0)

    def test_direction_interval(self):
        v = np.array([0.6, 0.8])
        lo, hi = adjusted_ci_direction(v, np.array([1.0, 2.0]), 1.0, 1.0, 1.0, 4, 0.95)
        self.assertAlmostEqual(0.5 * (lo + hi), 2.2)

    def test_t_pvalue(self):
        self.assertEqual(t_pvalue(0.0, 1.0, 1.0, 100), 1.0)
        self.assertAlmostEqual(t_pvalue(1.959964, 1.0, 1.0, 1), 0.05, places=6)
        self.assertGreater(t_pvalue(0.1, 1.0, 1.0, 100), t_pvalue(0.2, 1.0, 1.0, 100))
        self.assertAlmostEqual(t_pvalue(0.1, 1.0, 1.0, 100), t_pvalue(0.3, 3.0, 1.0, 100))

    def test_lrt_pvalue(self):
        self.assertEqual(lrt_pvalue(0.0, 0.2, 1.0, 0.2), 1.0)
        self.assertAlmostEqual(lrt_pvalue(3.841459 / 2, 0.5, 1.0, 0.5), 0.05, places=6)
        # factor 1 reduces to the classical chi-squared p-value
        self.assertAlmostEqual(lrt_pvalue(2.5, 0.25, 2.0, 1.0), chi2.sf(5.0, 1))
        self.assertAlmostEqual(lrt_pvalue(2.5, 0.25, 2.0, 1.0, df=3), chi2.sf(5.0, 3))
        with self.assertRaises(InvalidParameterError):
            lrt_pvalue(-0.1, 0.2, 1.0, 1.0)


class TestStandardize(unittest.TestCase):

    def test_exact_scaling_gives_zero(self):
        beta = np.array([0.0, 1.0, -2.0])
        T = standardize_T(1.4 * beta, beta, 1.4, 3.0, np.ones(3), 100)
        np.testing.assert_array_equal(T, np.zeros(3))

    def test_single_coordinate_matches_T(self):
        beta_hat, beta, tau = np.array([0.7]), np.array([0.4]), np.array([0.8])
        single = standardize_multi(beta_hat, beta, np.array([[1.0 / 0.8 ** 2]]), 1.2, 2.5, 400)
        T = standardize_T(beta_hat, beta, 1.2, 2.5, tau, 400)
        self.assertAlmostEqual(single[0], T[0], places=12)

    def test_null_pair_components_uncorrelated(self):
        n, p = 200, 20
        beta = np.zeros(p)
        beta[:10] = 1.0 / np.sqrt(10)
        fp = solve_fixed_point(TheoryInputs(p / n, 1.0))
        rng = np.random.default_rng(12)
        pairs = []
        while len(pairs) < 300:
            X = rng.standard_normal((n, p))
            fit = fit_mle(X, sample_labels(X, beta, rng))
            if fit.converged:
                pairs.append(
                    standardize_multi(fit.beta_hat[[12, 17]], np.zeros(2), np.eye(2), fp.alpha_star, fp.sigma_star, n)
                )
        pairs = np.array(pairs)
        self.assertLess(abs(np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1]), 0.2)

    def test_multi_rejects_non_pd(self):
        with self.assertRaises(InvalidParameterError):
            standardize_multi(np.zeros(2), np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]), 1.0, 1.0, 10)

    def test_shape_mismatch(self):
        with self.assertRaises(InvalidParameterError):
            standardize_T(np.zeros(2), np.zeros(3), 1.0, 1.0, np.ones(2), 10)


class TestReport(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        rng = np.random.default_rng(7)
        cls.X = rng.standard_normal((400, 20))
        beta = np.zeros(20)
        beta[:10] = 1.0 / np.sqrt(10)
        cls.y = sample_labels(cls.X, beta, rng)
        cls.fit = fit_mle(cls.X, cls.y)
        cls.params = solve_fixed_point(TheoryInputs(0.05, 1.0))

    def test_report_columns_and_ordering(self):
        report = build_report(self.X, self.y, self.fit, self.params, lrt=True, names=[f"x{i}" for i in range(20)])
        self.assertEqual(list(report.table.columns), REPORT_COLUMNS)
        self.assertEqual(len(report.table), 20)
        table = report.table
        self.assertTrue(np.all(table["ci_lo"] <= table["debiased"]))
        self.assertTrue(np.all(table["debiased"] <= table["ci_hi"]))
        for col in ("p_t", "p_lrt"):
            self.assertTrue(np.all((table[col] >= 0) & (table[col] <= 1)))
        self.assertEqual(report.header["p"], 20)
        self.assertEqual(report.header["names"][3], "x3")

    def test_ar1_and_provided_sources(self):
        report = build_report(self.X, self.y, self.fit, self.params, tau_source="ar1")
        self.assertIn("rho_hat", report.header)
        provided = build_report(self.X, self.y, self.fit, self.params, tau_source="provided", tau=np.ones(20))
        np.testing.assert_array_equal(provided.table["tau_hat"], np.ones(20))
        with self.assertRaises(InvalidParameterError):
            build_report(self.X, self.y, self.fit, self.params, tau_source="provided")

    def test_write_and_read(self):
        report = build_report(self.X, self.y, self.fit, self.params)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_report(report, os.path.join(tmp, "out", "report.csv"))
            loaded = read_report(path)
            np.testing.assert_array_equal(loaded.table["beta_hat"].to_numpy(), report.table["beta_hat"].to_numpy())
            self.assertTrue(loaded.table["p_lrt"].isna().all())
            self.assertEqual(loaded.header["n"], 400)
            self.assertAlmostEqual(loaded.header["alpha_hat"], self.params.alpha_star)

    def test_rejects_nonconverged_fit(self):
        bad = FitResult(np.zeros(20), False, 200, -1.0, 1.0, "max_iter")
        with self.assertRaises(NonConvergenceError):
            build_report(self.X, self.y, bad, self.params)


if __name__ == '__main__':
    unittest.main()
