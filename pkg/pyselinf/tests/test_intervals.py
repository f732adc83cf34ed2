import unittest
from mock import patch

import numpy as np
from scipy import integrate, optimize, stats

from pyselinf.pyselinf_errors import PyselinfConfigError, EffectiveSampleCollapse
from pyselinf.qmc.batchfactory import point_batch, replicate_set
from pyselinf.sov.orthant import gibson_reorder, sov_transform
from pyselinf.inference.laws import conditional_law, reference_law
from pyselinf.inference.pivot import pvalue, test_all_coordinates as null_pvalues
from pyselinf.inference.intervals import GridConfig, WeightedPivotCurve, holdout_estimate, grid_anchor, \
    invert_pvalue_curve, confidence_intervals, two_sided, truncated_tail_expectation
from pyselinf.tests.records import single_variable_record, strong_record, explicit_record


def conditional_cdf_by_quadrature(record, theta):
    """F(theta_hat; theta) of a single selected variable by one-dimensional quadrature"""
    law = conditional_law(record, [1.0], theta)
    mu = law.mu_b[0]
    sd = np.sqrt(law.Sigma_b[0, 0])
    g1, g2 = law.functional(law.theta_hat)
    upper = max(mu, 0.0) + 12.0 * sd
    numerator, _ = integrate.quad(lambda b: stats.norm.cdf(g1[0] * b + g2) * stats.norm.pdf(b, mu, sd),
                                  0.0, upper, points=[max(mu, 0.0)], epsabs=1e-14, epsrel=1e-11, limit=200)
    return numerator / stats.norm.sf(0.0, mu, sd)


class TestPivotSingleVariable(unittest.TestCase):
    """With one selected variable the integrated estimators are exact"""

    def setUp(self):
        self.record = single_variable_record()
        self.sd = np.sqrt(self.record.Sigma[0, 0])
        self.reps = replicate_set(1, 64, 2, seed=3)

    def test_pvalue_agrees_with_quadrature(self):
        theta_hat = self.record.beta_hat[0]
        for theta in (0.0, theta_hat - self.sd, theta_hat + 1.5 * self.sd):
            expected = conditional_cdf_by_quadrature(self.record, theta)
            self.assertAlmostEqual(pvalue(self.record, [1.0], theta, self.reps).value, expected, places=7)

    def test_alternatives_transform_the_cdf(self):
        theta = self.record.beta_hat[0] - 0.5 * self.sd
        less = pvalue(self.record, [1.0], theta, self.reps, 'less').value
        greater = pvalue(self.record, [1.0], theta, self.reps, 'greater').value
        both = pvalue(self.record, [1.0], theta, self.reps, 'two-sided').value
        self.assertAlmostEqual(less + greater, 1.0, places=12)
        self.assertAlmostEqual(both, 2.0 * min(less, greater), places=12)

    def test_unknown_alternative_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            pvalue(self.record, [1.0], 0.0, self.reps, 'unequal')

    def test_reweighted_curve_agrees_with_quadrature(self):
        reference = reference_law(self.record)
        og = gibson_reorder(reference.mean, reference.cov)
        law = conditional_law(self.record, [1.0], self.record.beta_hat[0])
        curve = WeightedPivotCurve(sov_transform(og, point_batch(1, 16, seed=1)), law)
        thetas = self.record.beta_hat[0] + self.sd * np.array([-3.0, -1.0, 0.0, 1.0, 3.0])
        p, ess = curve.evaluate(thetas)
        expected = [conditional_cdf_by_quadrature(self.record, theta) for theta in thetas]
        np.testing.assert_allclose(p, expected, atol=1e-6)
        np.testing.assert_allclose(ess, 16.0, rtol=1e-10)

    def test_interval_agrees_with_inverted_quadrature(self):
        alpha = 0.1
        theta_hat = self.record.beta_hat[0]

        def shifted(theta, level):
            return conditional_cdf_by_quadrature(self.record, theta) - level

        lower = optimize.brentq(shifted, theta_hat - 6 * self.sd, theta_hat, args=(1 - alpha / 2,), xtol=1e-10)
        upper = optimize.brentq(shifted, theta_hat, theta_hat + 6 * self.sd, args=(alpha / 2,), xtol=1e-10)
        entry = confidence_intervals(self.record, alpha, self.reps).entries[0]
        self.assertAlmostEqual(entry.lower, lower, delta=1e-3)
        self.assertAlmostEqual(entry.upper, upper, delta=1e-3)
        self.assertEqual(entry.flags, '')


class TestConfidenceIntervals(unittest.TestCase):

    def test_limits_match_direct_pvalues(self):
        # A small carving fraction keeps the reweighting well conditioned
        record = strong_record(rho=0.3, seed=1)
        alpha = 0.05
        report = confidence_intervals(record, alpha, replicate_set(3, 1024, 8, seed=2))
        direct = replicate_set(3, 4096, 4, seed=5)
        for j, entry in enumerate(report.entries):
            eta = np.eye(3)[j]
            for limit in (entry.lower, entry.upper):
                value = pvalue(record, eta, limit, direct, 'two-sided').value
                self.assertAlmostEqual(value, alpha, delta=0.015)

    def test_strong_signals_give_small_pvalues_and_covering_intervals(self):
        record = strong_record()
        report = confidence_intervals(record, 0.05, replicate_set(3, 512, 4, seed=0))
        self.assertEqual(report.method, 'cdf-sov')
        self.assertEqual([entry.index for entry in report.entries], [0, 1, 2])
        for j, entry in enumerate(report.entries):
            self.assertLess(entry.pvalue, 1e-6)
            self.assertLess(entry.lower, record.beta_hat[j])
            self.assertGreater(entry.upper, record.beta_hat[j])
            self.assertTrue(np.isfinite(entry.boundary_stderr))

    def test_record_without_holdout_is_anchored_at_estimate(self):
        record = explicit_record()
        self.assertIsNone(holdout_estimate(record))
        anchor, scale = grid_anchor(record, 0)
        self.assertEqual(anchor, record.beta_hat[0])
        self.assertAlmostEqual(scale, np.sqrt(record.Sigma[0, 0]), places=15)
        report = confidence_intervals(record, 0.1, replicate_set(record.d, 256, 2, seed=0))
        self.assertEqual(len(report), record.d)
        for entry in report:
            self.assertTrue(0.0 <= entry.pvalue <= 1.0)

    def test_holdout_estimate_is_least_squares_on_holdout_rows(self):
        record = strong_record()
        coef, cov = holdout_estimate(record)
        X2, Y2 = record.holdout_data()
        np.testing.assert_allclose(coef, np.linalg.lstsq(X2, Y2, rcond=None)[0], atol=1e-10)
        np.testing.assert_allclose(cov, np.linalg.inv(X2.T @ X2), rtol=1e-10)

    def test_collapsed_effective_sample_is_flagged(self):
        record = single_variable_record()
        reps = replicate_set(1, 16, 2, seed=0)
        report = confidence_intervals(record, 0.1, reps, GridConfig(ess_floor=1e9))
        self.assertIn('ess-collapse', report.entries[0].flags)
        with self.assertRaises(EffectiveSampleCollapse):
            confidence_intervals(record, 0.1, reps, GridConfig(ess_floor=1e9, strict=True))

    def test_invalid_level_raises_valueerror(self):
        with self.assertRaises(ValueError):
            confidence_intervals(single_variable_record(), 0.0, replicate_set(1, 16, 2, seed=0))


class TestTailExpectation(unittest.TestCase):

    def test_agrees_with_quadrature_far_in_the_tail(self):
        for slope, intercept, h in ((0.8, -5.0, 6.5), (-1.2, 11.0, 9.0), (2.5, -20.0, 7.0), (0.3, 0.1, 30.0)):
            def scaled(x):
                return np.exp(-0.5 * (x - h) * (x + h))
            mass, _ = integrate.quad(scaled, h, np.inf, epsabs=0.0, epsrel=1e-13)
            value, _ = integrate.quad(lambda x: stats.norm.cdf(slope * x + intercept) * scaled(x), h, np.inf,
                                      epsabs=0.0, epsrel=1e-13)
            expected = value / mass
            result = truncated_tail_expectation(slope, np.array([intercept]), np.array([h]))[0]
            self.assertAlmostEqual(result, expected, delta=1e-9 + 1e-7 * expected,
                                   msg="slope={} intercept={} h={}".format(slope, intercept, h))

    def test_far_tail_entries_use_the_quadrature(self):
        record = single_variable_record()
        reference = reference_law(record)
        og = gibson_reorder(reference.mean, reference.cov)
        law = conditional_law(record, [1.0], record.beta_hat[0])
        curve = WeightedPivotCurve(sov_transform(og, point_batch(1, 16, seed=1)), law)
        with patch('pyselinf.inference.intervals.TAIL_SWITCH', -np.inf):
            with patch('pyselinf.inference.intervals.truncated_tail_expectation',
                       wraps=truncated_tail_expectation) as mock_tail:
                curve.evaluate([record.beta_hat[0]])
                mock_tail.assert_called_once()


class TestInvertPvalueCurve(unittest.TestCase):
    """Inversion of a known pivot p(theta) = Phi(-theta)"""

    @staticmethod
    def gaussian_curve(thetas):
        thetas = np.asarray(thetas, dtype=float)
        return stats.norm.cdf(-thetas), np.full(thetas.shape, 100.0)

    def test_interval_of_gaussian_pivot(self):
        grid = np.linspace(-5.0, 5.0, 101)
        lower, upper, flags, kept = invert_pvalue_curve(grid, self.gaussian_curve, 0.05, 1e-6)
        self.assertAlmostEqual(lower, -1.959963984540054, delta=1e-6)
        self.assertAlmostEqual(upper, 1.959963984540054, delta=1e-6)
        self.assertEqual(flags, [])
        self.assertTrue(np.all(two_sided(self.gaussian_curve(kept)[0]) >= 0.05))

    def test_narrow_grid_is_flagged(self):
        lower, upper, flags, _ = invert_pvalue_curve(np.linspace(-1.0, 1.0, 11), self.gaussian_curve, 0.05, 1e-6)
        self.assertEqual((lower, upper), (-1.0, 1.0))
        self.assertEqual(flags, ['grid-bound'])

    def test_rejecting_everywhere_returns_empty_interval(self):
        lower, upper, flags, kept = invert_pvalue_curve(np.linspace(3.0, 5.0, 11), self.gaussian_curve, 0.05, 1e-6)
        self.assertTrue(np.isnan(lower) and np.isnan(upper))
        self.assertIn('empty', flags)
        self.assertEqual(kept.size, 0)

    def test_increasing_pivot_is_flagged(self):
        def rising(thetas):
            thetas = np.asarray(thetas, dtype=float)
            return stats.norm.cdf(thetas), np.ones(thetas.shape)

        _, _, flags, _ = invert_pvalue_curve(np.linspace(-5.0, 5.0, 21), rising, 0.05, 1e-6)
        self.assertIn('non-monotone', flags)

    def test_grid_config_validates(self):
        with self.assertRaises(ValueError):
            GridConfig(points=1)
        np.testing.assert_allclose(GridConfig(points=3, width=2.0).grid(1.0, 0.5), [0.0, 1.0, 2.0])


class TestAllCoordinates(unittest.TestCase):

    def test_one_entry_per_selected_variable(self):
        record = strong_record()
        report = null_pvalues(record, replicate_set(3, 256, 3, seed=0))
        self.assertEqual(len(report), 3)
        for j, entry in enumerate(report):
            self.assertEqual(entry.estimate, record.beta_hat[j])
            self.assertLess(entry.pvalue, 1e-6)
            self.assertTrue(np.isnan(entry.lower))
