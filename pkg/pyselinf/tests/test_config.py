import os
import shutil
import tempfile
import unittest

from pyselinf.pyselinf_errors import PyselinfConfigError
from pyselinf.cli.config import ExperimentConfig, load_config, resolve_config, parse_value

CONFIG_TEXT = """[experiment]
n = 120
p = 30
covariance = equi
signal = 0.4
methods = splitting, cdf-sov
sigma2 = none
timings = yes
"""


class TestExperimentConfig(unittest.TestCase):

    def test_defaults(self):
        cfg = ExperimentConfig()
        self.assertEqual(cfg.scenario, 'simulate')
        self.assertEqual(cfg.replicates, 50)
        self.assertEqual(cfg.bootstrap, 1000)
        self.assertEqual(cfg.methods, ('splitting', 'cdf-sov', 'mle-sov'))
        self.assertIsNone(cfg.out)

    def test_rho_outside_unit_interval_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            ExperimentConfig(rho=1.0)

    def test_unknown_method_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            ExperimentConfig(methods=('cdf-sov', 'bayes'))

    def test_sparsity_above_p_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            ExperimentConfig(p=5, sparsity=6)

    def test_unknown_generator_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            ExperimentConfig(generator='halton')

    def test_to_dict_lists_methods(self):
        settings = ExperimentConfig().to_dict()
        self.assertEqual(settings['methods'], ['splitting', 'cdf-sov', 'mle-sov'])
        self.assertEqual(settings['n'], 300)


class TestParseValue(unittest.TestCase):

    def test_types_follow_fields(self):
        self.assertEqual(parse_value('n', ' 42 '), 42)
        self.assertEqual(parse_value('rho', '0.5'), 0.5)
        self.assertEqual(parse_value('methods', 'splitting,,mle-sov '), ('splitting', 'mle-sov'))
        self.assertTrue(parse_value('header', 'on'))
        self.assertFalse(parse_value('timings', 'No'))
        self.assertIsNone(parse_value('sigma2', 'None'))
        self.assertIsNone(parse_value('out', ''))
        self.assertEqual(parse_value('design', 'x.csv'), 'x.csv')

    def test_unknown_key_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            parse_value('lambda', '3')

    def test_bad_number_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            parse_value('n', 'many')

    def test_bad_boolean_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            parse_value('timings', 'maybe')


class TestLoadConfig(unittest.TestCase):

    def setUp(self):
        self.folder = tempfile.mkdtemp()
        self.path = os.path.join(self.folder, 'experiment.ini')

    def tearDown(self):
        shutil.rmtree(self.folder)

    def _write(self, text):
        with open(self.path, 'w') as handle:
            handle.write(text)

    def test_reads_experiment_section(self):
        self._write(CONFIG_TEXT)
        settings = load_config(self.path)
        self.assertEqual(settings['n'], 120)
        self.assertEqual(settings['covariance'], 'equi')
        self.assertEqual(settings['methods'], ('splitting', 'cdf-sov'))
        self.assertIsNone(settings['sigma2'])
        self.assertTrue(settings['timings'])

    def test_dashed_keys_are_accepted(self):
        self._write("[experiment]\nrqmc-n = 64\n")
        self.assertEqual(load_config(self.path), {'rqmc_n': 64})

    def test_missing_section_raises_configerror(self):
        self._write("[other]\nn = 3\n")
        with self.assertRaises(PyselinfConfigError):
            load_config(self.path)

    def test_unknown_key_raises_configerror(self):
        self._write("[experiment]\nwidth = 3\n")
        with self.assertRaises(PyselinfConfigError):
            load_config(self.path)

    def test_missing_file_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            load_config(os.path.join(self.folder, 'absent.ini'))

    def test_overrides_win_over_file(self):
        self._write(CONFIG_TEXT)
        cfg = resolve_config(self.path, {'n': 200, 'p': None, 'scenario': 'compare-samplers'})
        self.assertEqual(cfg.n, 200)
        self.assertEqual(cfg.p, 30)
        self.assertEqual(cfg.scenario, 'compare-samplers')
        self.assertEqual(cfg.signal, 0.4)
        self.assertEqual(cfg.rho, 0.8)

    def test_no_file_gives_defaults_with_overrides(self):
        cfg = resolve_config(None, {'alpha': 0.1})
        self.assertEqual(cfg.alpha, 0.1)
        self.assertEqual(cfg.n, 300)

    def test_unknown_override_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            resolve_config(None, {'bogus': 1})

    def test_invalid_file_value_raises_configerror(self):
        self._write("[experiment]\nalpha = 1.5\n")
        with self.assertRaises(PyselinfConfigError):
            resolve_config(self.path)
