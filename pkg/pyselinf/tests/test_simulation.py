import os
import unittest

import numpy as np
import pandas as pd

from pyselinf.cli.config import ExperimentConfig
from pyselinf.cli.simulation import ResultTable, covariance_matrix, signal_strength, simulate_dataset, \
    bootstrap_interval, summarize, run_repetition, run_simulation, SIMULATION_COLUMNS

SMALL = dict(n=60, p=5, sparsity=2, signal=20.0, repetitions=2, methods=('splitting', 'cdf-sov'), replicates=4,
             rqmc_n=64, seed=3)


def synthetic_outcomes():
    nan = float('nan')
    return [
        {'index': 0, 'status': 'ok', 'selected': 2, 'methods': {
            'splitting': {'covered': [True, False], 'lengths': [1.0, 2.0], 'stderrs': [nan, nan], 'seconds': 0.1},
            'cdf-sov': {'covered': [True, True], 'lengths': [1.5, nan], 'stderrs': [0.01, 0.03], 'seconds': 0.5}}},
        {'index': 1, 'status': 'empty', 'selected': 0, 'methods': {}},
        {'index': 2, 'status': 'ok', 'selected': 1, 'methods': {
            'splitting': {'covered': [True], 'lengths': [3.0], 'stderrs': [nan], 'seconds': 0.3},
            'cdf-sov': None}},
    ]


class TestDesigns(unittest.TestCase):

    def test_autoregressive_covariance(self):
        np.testing.assert_allclose(covariance_matrix(3, 'ar', 0.5),
                                   [[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]])

    def test_equicorrelated_covariance(self):
        np.testing.assert_allclose(covariance_matrix(3, 'equi', 0.2),
                                   [[1.0, 0.2, 0.2], [0.2, 1.0, 0.2], [0.2, 0.2, 1.0]])

    def test_unknown_covariance_raises_valueerror(self):
        with self.assertRaises(ValueError):
            covariance_matrix(3, 'banded', 0.2)

    def test_simulated_dataset_is_reproducible_and_sparse(self):
        cfg = ExperimentConfig(**SMALL)
        first, beta = simulate_dataset(cfg, 11)
        second, _ = simulate_dataset(cfg, 11)
        np.testing.assert_array_equal(first.X, second.X)
        np.testing.assert_array_equal(first.Y, second.Y)
        self.assertEqual(first.X.shape, (60, 5))
        self.assertEqual(first.sigma2, 1.0)
        self.assertEqual(np.count_nonzero(beta), 2)
        np.testing.assert_allclose(np.abs(beta[beta != 0]), signal_strength(20.0, 60, 5))


class TestSummary(unittest.TestCase):

    def setUp(self):
        self.cfg = ExperimentConfig(methods=('splitting', 'cdf-sov'), repetitions=3, bootstrap=200)

    def test_rows_pool_coordinates_over_repetitions(self):
        frame = summarize(self.cfg, synthetic_outcomes()).to_frame()
        self.assertEqual(list(frame.columns), list(SIMULATION_COLUMNS))
        splitting, sov = frame.to_dict(orient='records')
        self.assertEqual((splitting['used'], splitting['empty'], splitting['failed']), (2, 1, 0))
        self.assertEqual(splitting['coordinates'], 3)
        self.assertAlmostEqual(splitting['coverage'], 2.0 / 3.0)
        self.assertAlmostEqual(splitting['length'], 2.0)
        self.assertTrue(np.isnan(splitting['pvalue_stderr']))
        self.assertLessEqual(splitting['coverage_lower'], splitting['coverage'])
        self.assertGreaterEqual(splitting['coverage_upper'], splitting['coverage'])
        self.assertEqual((sov['used'], sov['failed'], sov['coordinates']), (1, 1, 2))
        self.assertEqual(sov['coverage'], 1.0)
        self.assertEqual(sov['length'], 1.5)
        self.assertAlmostEqual(sov['pvalue_stderr'], 0.02)

    def test_timings_add_a_column(self):
        cfg = ExperimentConfig(methods=('splitting', 'cdf-sov'), timings=True, bootstrap=50)
        frame = summarize(cfg, synthetic_outcomes()).to_frame()
        self.assertEqual(frame.columns[-1], 'seconds')
        self.assertAlmostEqual(frame.at[0, 'seconds'], 0.2)

    def test_no_outcomes_give_an_empty_table(self):
        self.assertEqual(len(summarize(self.cfg, [])), 0)

    def test_bootstrap_of_constant_ratio_is_degenerate(self):
        lower, upper = bootstrap_interval([1.0, 2.0, 3.0], [2.0, 4.0, 6.0], 100, np.random.default_rng(0))
        self.assertAlmostEqual(lower, 0.5)
        self.assertAlmostEqual(upper, 0.5)
        self.assertTrue(np.isnan(bootstrap_interval([], [], 10, np.random.default_rng(0))[0]))

    def test_coverage_outside_unit_interval_raises_valueerror(self):
        with self.assertRaises(ValueError):
            ResultTable(columns=('coverage',), rows=[{'coverage': 1.2}])

    def test_table_rebuilds_from_frame(self):
        table = summarize(self.cfg, synthetic_outcomes())
        rebuilt = ResultTable.from_frame(table.to_frame())
        pd.testing.assert_frame_equal(rebuilt.to_frame(), table.to_frame())


class TestRunSimulation(unittest.TestCase):

    def test_repetition_reports_every_method(self):
        outcome = run_repetition(ExperimentConfig(**SMALL), 0, 12345)
        self.assertIn(outcome['status'], ('ok', 'empty'))
        if outcome['status'] == 'ok':
            self.assertEqual(set(outcome['methods']), {'splitting', 'cdf-sov'})
            for result in outcome['methods'].values():
                if result is not None:
                    self.assertEqual(len(result['covered']), outcome['selected'])

    def test_same_seed_gives_same_table(self):
        cfg = ExperimentConfig(**SMALL)
        first = run_simulation(cfg).to_frame()
        second = run_simulation(cfg).to_frame()
        pd.testing.assert_frame_equal(first, second)
        self.assertEqual(list(first['method']), ['splitting', 'cdf-sov'])
        self.assertTrue((first['repetitions'] == 2).all())

    @unittest.skipUnless(os.environ.get('PYSELINF_SLOW_TESTS'), "set PYSELINF_SLOW_TESTS=1 to run")
    def test_workers_do_not_change_results(self):
        serial = run_simulation(ExperimentConfig(**SMALL)).to_frame()
        parallel = run_simulation(ExperimentConfig(workers=2, **SMALL)).to_frame()
        pd.testing.assert_frame_equal(serial, parallel)
