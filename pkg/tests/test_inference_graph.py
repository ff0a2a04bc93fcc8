"""Tests for the infer workflow graph."""

import os
import sys
import tempfile
import unittest

import numpy as np

# Add parent directory to path so we can import modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from config.settings import settings
from engine.inference import read_report
from engine.logistic_core import sample_labels
from engine.probe_frontier import ProbeConfig, default_grid
from engine.theory_engine import frontier_cache_path, frontier_from_knots, save_frontier
from graphs.inference_graph import create_inference_graph, inference_graph

SYNTHETIC_CURVE = frontier_from_knots(
    [0.01, 0.1, 0.2, 0.3, 0.4, 0.5],
    [20.0, 9.0, 5.0, 3.0, 1.5, 0.0],
    n=1000,
    reps=200,
)


def initial_state(X, y, output_path, **overrides):
    n, p = X.shape
    state = {
        "X": X,
        "y": y,
        "names": [f"x{i}" for i in range(p)],
        "level": 0.95,
        "tau_source": "rss",
        "lrt": False,
        "probe_config": ProbeConfig(kappa_grid=default_grid(p / n), resamples_per_kappa=6, seed=1),
        "curve": SYNTHETIC_CURVE,
        "threads": 1,
        "output_path": output_path,
        "errors": [],
        "exit_code": 0,
    }
    state.update(overrides)
    return state


class TestInferenceGraph(unittest.TestCase):

    def test_graph_compiles(self):
        self.assertIsNotNone(create_inference_graph())

    def test_separable_data_stops_early(self):
        X = np.array([[1.0], [2.0], [-1.0], [-2.0], [3.0]])
        y = np.array([1.0, 1.0, -1.0, -1.0, 1.0])
        with tempfile.TemporaryDirectory() as tmp:
            final = inference_graph.invoke(initial_state(X, y, os.path.join(tmp, "r.csv")))
        self.assertEqual(final["exit_code"], 3)
        self.assertEqual(len(final["errors"]), 1)
        self.assertTrue(final["errors"][0].startswith("separability:"))
        self.assertIsNone(final.get("report"))

    def test_separable_data_stops_before_loading_frontier(self):
        X = np.array([[1.0], [2.0], [-1.0], [-2.0], [3.0]])
        y = np.array([1.0, 1.0, -1.0, -1.0, 1.0])
        with tempfile.TemporaryDirectory() as tmp:
            state = initial_state(X, y, os.path.join(tmp, "r.csv"), curve=None, cache_dir=tmp, frontier_seed=7)
            final = inference_graph.invoke(state)
            self.assertEqual(os.listdir(tmp), [])
        self.assertEqual(final["exit_code"], 3)

    def test_probe_loads_cached_frontier(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((400, 40))
        beta = np.zeros(40)
        beta[0] = 2.0
        y = sample_labels(X, beta, rng)
        with tempfile.TemporaryDirectory() as tmp:
            save_frontier(
                SYNTHETIC_CURVE,
                frontier_cache_path(tmp, settings.FRONTIER_KAPPAS, settings.FRONTIER_N, settings.FRONTIER_REPS, 7),
            )
            state = initial_state(
                X, y, os.path.join(tmp, "report.csv"), curve=None, cache_dir=tmp, frontier_seed=7
            )
            final = inference_graph.invoke(state)
        self.assertEqual(final["errors"], [])
        np.testing.assert_array_equal(final["curve"].gammas, SYNTHETIC_CURVE.gammas)

    def test_probe_failure_sets_exit_code(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((400, 4))
        y = sample_labels(X, np.full(4, 0.3), rng)
        cfg = ProbeConfig(kappa_grid=(0.02, 0.03), resamples_per_kappa=4, seed=0)
        with tempfile.TemporaryDirectory() as tmp:
            final = inference_graph.invoke(initial_state(X, y, os.path.join(tmp, "r.csv"), probe_config=cfg))
        self.assertEqual(final["exit_code"], 4)
        self.assertIn("extend kappa_grid", final["errors"][0])

    def test_full_run_writes_report(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((400, 40))
        beta = np.zeros(40)
        beta[0] = 2.0
        y = sample_labels(X, beta, rng)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "out", "report.csv")
            final = inference_graph.invoke(initial_state(X, y, path))
            self.assertEqual(final["errors"], [])
            self.assertEqual(final["saved_path"], path)
            report = read_report(path)
            self.assertEqual(len(report.table), 40)
            self.assertEqual(report.header["names"][0], "x0")
            self.assertAlmostEqual(report.header["gamma_hat"], final["probe_result"].gamma_hat)
            self.assertIn("kappa_hat", report.header)


if __name__ == '__main__':
    unittest.main()
