"""Tests for covariance models and Gaussian designs."""

import os
import sys
import tempfile
import unittest

import numpy as np

# Add parent directory to path so we can import modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from engine.errors import ConfigurationError, InvalidParameterError
from engine.gauss_designs import (
    build_ar1,
    build_explicit,
    build_identity,
    build_random_correlation,
    conditional_sd,
    covariance_from_descriptor,
    load_explicit,
    sample_design,
    schur_precision_block,
    tau_of_direction,
)


class TestCovarianceConstruction(unittest.TestCase):

    def test_ar1_entries_and_precision_diagonal(self):
        spec = build_ar1(5, 0.5)
        self.assertAlmostEqual(spec.sigma[0, 2], 0.25)
        dense = np.linalg.inv(spec.sigma)
        np.testing.assert_allclose(spec.theta_diag, np.diag(dense), rtol=1e-12)

    def test_ar1_conditional_sd(self):
        tau = conditional_sd(build_ar1(50, 0.5))
        self.assertAlmostEqual(tau[10] ** 2, 0.6, places=12)
        self.assertAlmostEqual(tau[0] ** 2, 0.75, places=12)

    def test_identity(self):
        spec = build_identity(7)
        np.testing.assert_array_equal(conditional_sd(spec), np.ones(7))
        self.assertEqual(spec.cond, 1.0)

    def test_ar1_rejects_unit_correlation(self):
        with self.assertRaises(InvalidParameterError):
            build_ar1(5, 1.0)

    def test_random_correlation_is_reproducible(self):
        a = build_random_correlation(30, 10, 42)
        b = build_random_correlation(30, 10, 42)
        np.testing.assert_array_equal(a.sigma, b.sigma)
        np.testing.assert_allclose(np.diag(a.sigma), 1.0)
        self.assertGreater(np.linalg.eigvalsh(a.sigma).min(), 0)

    def test_random_correlation_off_diagonal_centered(self):
        upper = np.triu_indices(50, k=1)
        means = np.array([build_random_correlation(50, 10, seed).sigma[upper].mean() for seed in range(100)])
        se = means.std(ddof=1) / np.sqrt(means.size)
        self.assertLessEqual(abs(means.mean()), 3.0 * se)

    def test_condition_number_invariant_under_permutation(self):
        spec = build_ar1(12, 0.7)
        perm = np.random.default_rng(1).permutation(12)
        permuted = build_explicit(spec.sigma[np.ix_(perm, perm)])
        self.assertAlmostEqual(permuted.cond / spec.cond, 1.0, places=10)
        np.testing.assert_allclose(permuted.theta_diag, spec.theta_diag[perm], rtol=1e-10)

    def test_explicit_rejects_bad_matrices(self):
        with self.assertRaises(InvalidParameterError):
            build_explicit([[1.0, 0.5], [0.4, 1.0]])
        with self.assertRaises(InvalidParameterError):
            build_explicit([[1.0, 2.0], [2.0, 1.0]])

    def test_spec_arrays_are_read_only(self):
        spec = build_ar1(4, 0.3)
        with self.assertRaises(ValueError):
            spec.sigma[0, 0] = 2.0

    def test_load_explicit_from_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "sigma.csv")
            np.savetxt(path, np.array([[2.0, 0.5], [0.5, 1.0]]), delimiter=",")
            spec = load_explicit(path)
            self.assertEqual(spec.kind, "explicit")
            self.assertAlmostEqual(spec.sigma[0, 1], 0.5)
            same = covariance_from_descriptor({"kind": "explicit", "path": "sigma.csv"}, base_dir=tmp)
            np.testing.assert_array_equal(same.sigma, spec.sigma)

    def test_descriptor_unknown_kind(self):
        with self.assertRaises(ConfigurationError):
            covariance_from_descriptor({"kind": "toeplitz", "p": 3})


class TestDesignsAndPrecision(unittest.TestCase):

    def test_sample_design_covariance(self):
        spec = build_ar1(3, 0.5)
        X = sample_design(40000, spec, np.random.default_rng(0)).x
        np.testing.assert_allclose(np.cov(X, rowvar=False), spec.sigma, atol=0.03)

    def test_sample_design_is_seeded(self):
        spec = build_ar1(4, 0.2)
        a = sample_design(10, spec, 7).x
        b = sample_design(10, spec, 7).x
        np.testing.assert_array_equal(a, b)

    def test_tau_of_direction(self):
        spec = build_ar1(6, 0.4)
        e2 = np.eye(6)[2]
        self.assertAlmostEqual(tau_of_direction(spec, e2), conditional_sd(spec)[2], places=12)

        v = np.ones(6) / np.sqrt(6)
        dense = np.linalg.inv(spec.sigma)
        self.assertAlmostEqual(tau_of_direction(spec, v), 1.0 / np.sqrt(v @ dense @ v), places=12)

        with self.assertRaises(InvalidParameterError):
            tau_of_direction(spec, 2 * e2)

    def test_schur_precision_block(self):
        spec = build_random_correlation(12, 8, 3)
        dense = np.linalg.inv(spec.sigma)
        S = [1, 4, 9]
        np.testing.assert_allclose(schur_precision_block(spec, S), dense[np.ix_(S, S)], rtol=1e-9)

    def test_schur_rejects_duplicates(self):
        with self.assertRaises(InvalidParameterError):
            schur_precision_block(build_identity(4), [1, 1])


if __name__ == '__main__':
    unittest.main()
