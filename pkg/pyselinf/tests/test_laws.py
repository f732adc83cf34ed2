import unittest

import numpy as np
from scipy import stats

from pyselinf.pyselinf_errors import PyselinfConfigError, ShapeMismatch
from pyselinf.inference.laws import conditional_law, selection_geometry, reference_law, log_importance_weight, \
    importance_weight
from pyselinf.tests.records import strong_record, explicit_record

ETA = np.array([0.5, -1.0, 2.0])


def assert_close(first, second, rtol=1e-7):
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    scale = max(1.0, float(np.max(np.abs(second))))
    np.testing.assert_allclose(first, second, rtol=rtol, atol=rtol * scale)


class TestConditionalLaw(unittest.TestCase):
    """Conditional law of a contrast after carving"""

    def setUp(self):
        self.record = strong_record(seed=2)

    def test_generic_and_proportional_paths_agree(self):
        for target in ('submodel', 'full'):
            record = strong_record(seed=2, target=target)
            for eta in (np.array([1.0, 0.0, 0.0]), ETA):
                generic = conditional_law(record, eta, 0.7, path='generic')
                proportional = conditional_law(record, eta, 0.7, path='proportional')
                assert_close(generic.H, proportional.H)
                assert_close(generic.k, proportional.k)
                assert_close(generic.var_theta, proportional.var_theta)
                assert_close(generic.Sigma_b, proportional.Sigma_b)
                assert_close(generic.mu_b, proportional.mu_b)

    def test_submodel_variance_shrinks_by_one_plus_kappa(self):
        law = conditional_law(self.record, ETA, 0.0)
        self.assertAlmostEqual(law.var_theta, law.nu / 5.0, places=12)

    def test_law_density_is_reweighted_reference_density(self):
        law = conditional_law(self.record, ETA, 0.4)
        reference = reference_law(self.record)
        b = np.abs(np.random.default_rng(0).normal(size=(20, 3))) + 0.1
        target = stats.multivariate_normal(mean=law.mu_b, cov=law.Sigma_b).logpdf(b)
        proposal = stats.multivariate_normal(mean=reference.mean, cov=reference.cov).logpdf(b)
        gap = target - proposal - log_importance_weight(b, law.tau, law.delta())
        scale = 1.0 + np.max(np.abs(target)) + np.max(np.abs(proposal))
        self.assertLess(np.ptp(gap), 1e-7 * scale)

    def test_moving_theta_shifts_only_the_mean(self):
        law = conditional_law(self.record, ETA, 0.0)
        moved = conditional_law(self.record, ETA, 1.3)
        assert_close(law.at(1.3).mu_b, moved.mu_b)
        assert_close(moved.mu_b - law.mu_b, 1.3 * law.c_tilde)
        np.testing.assert_array_equal(moved.Sigma_b, law.Sigma_b)

    def test_functional_standardises_the_contrast(self):
        law = conditional_law(self.record, ETA, 0.2)
        b = np.abs(np.random.default_rng(1).normal(size=(5, 3)))
        g1, g2 = law.functional(0.9)
        np.testing.assert_allclose(b @ g1 + g2, (0.9 - law.mu_theta(b)) / law.sd_theta, rtol=1e-10, atol=1e-10)

    def test_weights_vanish_outside_the_orthant(self):
        law = conditional_law(self.record, ETA, 0.0)
        b = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, 1.0]])
        log_weights = log_importance_weight(b, law.tau, law.delta())
        self.assertTrue(np.isfinite(log_weights[0]))
        self.assertEqual(log_weights[1], -np.inf)
        self.assertEqual(importance_weight(b, law.tau, law.delta())[1], 0.0)

    def test_reference_law_has_precision_h(self):
        reference = reference_law(self.record)
        np.testing.assert_allclose(reference.precision @ reference.cov, np.eye(3), atol=1e-10)
        np.testing.assert_array_equal(reference.precision, selection_geometry(self.record).H)

    def test_contrast_of_wrong_length_raises_shapemismatch(self):
        with self.assertRaises(ShapeMismatch):
            conditional_law(self.record, [1.0, 0.0], 0.0)

    def test_zero_contrast_raises_valueerror(self):
        with self.assertRaises(ValueError):
            conditional_law(self.record, np.zeros(3), 0.0)

    def test_unknown_path_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            selection_geometry(self.record, path='direct')


class TestRandomCarvingRecords(unittest.TestCase):
    """Algebraic identities checked across many random carving records"""

    def test_generic_and_proportional_paths_agree(self):
        rng = np.random.default_rng(5)
        for seed in range(50):
            record = strong_record(rho=float(rng.choice([0.5, 0.6, 0.7, 0.8, 0.9])), seed=seed,
                                   target='submodel' if seed % 2 else 'full')
            eta = rng.normal(size=record.d)
            theta = float(rng.normal(scale=2.0))
            generic = conditional_law(record, eta, theta, path='generic')
            proportional = conditional_law(record, eta, theta, path='proportional')
            for field in ('H', 'k', 'var_theta', 'Sigma_b', 'mu_b'):
                assert_close(getattr(generic, field), getattr(proportional, field), rtol=1e-8)

    def test_log_weight_is_the_log_density_ratio_up_to_a_constant(self):
        rng = np.random.default_rng(6)
        record = strong_record(seed=4)
        reference = reference_law(record)
        proposal_law = stats.multivariate_normal(mean=reference.mean, cov=reference.cov)
        for _ in range(20):
            law = conditional_law(record, rng.normal(size=record.d), float(rng.normal(scale=2.0)))
            b = rng.exponential(scale=2.0, size=(100, record.d)) + 1e-3
            target = stats.multivariate_normal(mean=law.mu_b, cov=law.Sigma_b).logpdf(b)
            gap = target - proposal_law.logpdf(b) - log_importance_weight(b, law.tau, law.delta())
            self.assertLess(np.ptp(gap), 1e-8 * (1.0 + np.max(np.abs(target))))


class TestExplicitRandomization(unittest.TestCase):

    def setUp(self):
        self.record = explicit_record()

    def test_auto_path_is_generic(self):
        self.assertEqual(selection_geometry(self.record).path, 'generic')

    def test_proportional_path_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            selection_geometry(self.record, path='proportional')

    def test_sigma_b_adds_contrast_direction_to_h_inverse(self):
        eta = np.ones(self.record.d)
        law = conditional_law(self.record, eta, 0.0)
        expected = law.H_inv + law.nu * np.outer(law.c_tilde, law.c_tilde)
        np.testing.assert_allclose(law.Sigma_b, expected, rtol=1e-12)
        np.testing.assert_allclose(np.linalg.inv(law.Sigma_b), law.H - np.outer(law.tau, law.tau), rtol=1e-6,
                                   atol=1e-8 * np.max(np.abs(law.H)))
