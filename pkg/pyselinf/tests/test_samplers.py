import unittest
from mock import patch

import numpy as np
from scipy import stats

from pyselinf.pyselinf_errors import PyselinfConfigError, PyselinfNotSupportedError
from pyselinf.qmc.batchfactory import replicate_set
from pyselinf.sov.orthant import OrthantGaussian, gibson_reorder
from pyselinf.sov.estimators import truncated_moments
from pyselinf.inference.laws import conditional_law
from pyselinf.inference.pivot import pvalue
from pyselinf.baselines.samplerbase import TruncatedGaussianSampler
from pyselinf.baselines.samplerfactory import truncated_sampler
from pyselinf.baselines.sovsampler import SovSampler
from pyselinf.baselines.hitandrun import HitAndRunConfig, HitAndRunSampler, find_mode, pc_directions, \
    truncated_standard_normal, chain_directions, hit_and_run_sample, chain_pivot, hit_and_run_pvalue, \
    hit_and_run_intervals
from pyselinf.util.special import trunc_norm_moments_1d
from pyselinf.tests.records import single_variable_record, strong_record

MU_3 = np.array([0.5, -0.2, 0.1])
SIGMA_3 = np.array([[1.0, 0.3, 0.3],
                    [0.3, 1.0, 0.3],
                    [0.3, 0.3, 1.0]])


def well_conditioned_instance(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(5, 5))
    return rng.normal(size=5), A @ A.T / 5.0 + np.eye(5)


def projected_gradient_mode(mu, Sigma, iterations=20000):
    precision = np.linalg.inv(Sigma)
    step = 1.0 / np.linalg.eigvalsh(precision)[-1]
    b = np.maximum(mu, 0.0)
    for _ in range(iterations):
        b = np.maximum(b - step * precision @ (b - mu), 0.0)
    return b


class TestFindMode(unittest.TestCase):

    def test_feasible_mean_is_the_mode(self):
        og = OrthantGaussian.natural([1.0, 2.0, 0.5], SIGMA_3)
        np.testing.assert_allclose(find_mode(og), [1.0, 2.0, 0.5], atol=1e-10)

    def test_negative_univariate_mean_gives_zero(self):
        self.assertEqual(find_mode(OrthantGaussian.natural([-1.0], [[2.0]]))[0], 0.0)

    def test_mode_satisfies_optimality_conditions(self):
        mu, Sigma = well_conditioned_instance(0)
        mode = find_mode(OrthantGaussian.natural(mu, Sigma))
        grad = np.linalg.solve(Sigma, mode - mu)
        self.assertTrue(np.all(mode >= 0.0))
        free = mode > 0.0
        np.testing.assert_allclose(grad[free], 0.0, atol=1e-8)
        self.assertTrue(np.all(grad[~free] >= -1e-8))

    def test_mode_agrees_with_projected_gradient(self):
        mu, Sigma = well_conditioned_instance(1)
        np.testing.assert_allclose(find_mode(OrthantGaussian.natural(mu, Sigma)),
                                   projected_gradient_mode(mu, Sigma), atol=1e-6)


class TestDirections(unittest.TestCase):

    def test_isotropic_covariance_needs_three_of_four_components(self):
        directions = pc_directions(np.eye(4))
        self.assertEqual(directions.shape, (3, 4))
        np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0)

    def test_dominant_component_is_enough(self):
        directions = pc_directions(np.diag([0.5, 9.0, 0.5]))
        self.assertEqual(directions.shape, (1, 3))
        self.assertAlmostEqual(abs(directions[0, 1]), 1.0, places=12)

    def test_coordinate_axes_come_first(self):
        og = OrthantGaussian.natural(MU_3, SIGMA_3)
        directions = chain_directions(og, HitAndRunConfig(n=10))
        np.testing.assert_array_equal(directions[:3], np.eye(3))
        self.assertEqual(chain_directions(og, HitAndRunConfig(n=10, use_pcs=False)).shape, (3, 3))


class TestHitAndRun(unittest.TestCase):

    def test_truncated_standard_normal_stays_in_bounds(self):
        for u in (1e-12, 0.3, 0.999999):
            for lower, upper in ((-np.inf, -1.0), (-0.5, 0.5), (2.0, np.inf), (40.0, 41.0)):
                value = truncated_standard_normal(u, lower, upper)
                self.assertTrue(lower <= value <= upper)

    def test_truncated_standard_normal_inverts_the_truncated_cdf(self):
        u = (np.arange(200) + 0.5) / 200.0
        for lower, upper in ((-0.5, 1.2), (2.5, np.inf), (-np.inf, -1.0)):
            draws = [truncated_standard_normal(v, lower, upper) for v in u]
            np.testing.assert_allclose(draws, stats.truncnorm.ppf(u, lower, upper), rtol=1e-8, atol=1e-10)

    def test_line_move_draws_the_truncated_conditional(self):
        og = OrthantGaussian.natural([-0.3, 0.4], [[1.0, 0.6], [0.6, 2.0]])
        start = np.array([0.5, 1.5])
        moves = np.array([hit_and_run_sample(og, HitAndRunConfig(n=1, burn_in=0, seed=seed), start=start,
                                             directions=np.eye(2)[:1])[0] for seed in range(2000)])
        np.testing.assert_array_equal(moves[:, 1], 1.5)
        mean = -0.3 + 0.6 / 2.0 * (1.5 - 0.4)
        sd = np.sqrt(1.0 - 0.6 ** 2 / 2.0)
        line_law = stats.truncnorm(-mean / sd, np.inf, loc=mean, scale=sd)
        self.assertGreater(stats.kstest(moves[:, 0], line_law.cdf).pvalue, 1e-3)

    def test_univariate_chain_draws_the_truncated_law(self):
        og = OrthantGaussian.natural([0.0], [[1.0]])
        samples = hit_and_run_sample(og, HitAndRunConfig(n=4000, seed=3))
        self.assertTrue(np.all(samples > 0.0))
        mean, var = trunc_norm_moments_1d(0.0, 1.0, 0.0)
        self.assertAlmostEqual(samples.mean(), mean, delta=4 * np.sqrt(var / 4000))

    def test_chain_moments_agree_with_sov(self):
        og = gibson_reorder(MU_3, SIGMA_3)
        samples = hit_and_run_sample(OrthantGaussian.natural(MU_3, SIGMA_3), HitAndRunConfig(n=1 << 14, seed=4))
        mean, _ = truncated_moments(og, replicate_set(3, 4096, 4, seed=0))
        np.testing.assert_allclose(samples.mean(axis=0), mean, atol=0.06)

    def test_chain_is_reproducible(self):
        og = OrthantGaussian.natural(MU_3, SIGMA_3)
        cfg = HitAndRunConfig(n=50, burn_in=5, seed=9)
        np.testing.assert_array_equal(hit_and_run_sample(og, cfg), hit_and_run_sample(og, cfg))

    def test_prepared_sampler_draws_the_same_chain(self):
        og = OrthantGaussian.natural(MU_3, SIGMA_3)
        cfg = HitAndRunConfig(n=50, seed=9)
        sampler = HitAndRunSampler(cfg)
        sampler.prepare(og)
        samples, weights = sampler.draw(og)
        np.testing.assert_array_equal(samples, hit_and_run_sample(og, cfg))
        np.testing.assert_array_equal(weights, np.ones(50))

    def test_prepared_state_is_not_used_for_another_instance(self):
        sampler = HitAndRunSampler(HitAndRunConfig(n=20, seed=1))
        sampler.prepare(OrthantGaussian.natural(MU_3, SIGMA_3))
        other = OrthantGaussian.natural(-MU_3, SIGMA_3)
        with patch('pyselinf.baselines.hitandrun.find_mode', wraps=find_mode) as mock_find_mode:
            sampler.draw(other)
            mock_find_mode.assert_called_once_with(other)

    def test_invalid_config_raises_configerror(self):
        with self.assertRaises(PyselinfConfigError):
            HitAndRunConfig(n=0)
        with self.assertRaises(PyselinfConfigError):
            HitAndRunConfig(n=10, burn_in=-1)


class TestChainPivot(unittest.TestCase):

    def test_pivot_at_anchor_is_plain_average(self):
        record = strong_record()
        law = conditional_law(record, [1.0, 0.0, 0.0], record.beta_hat[0])
        samples = hit_and_run_sample(OrthantGaussian.natural(law.mu_b, law.Sigma_b), HitAndRunConfig(n=200))
        p, ess = chain_pivot(samples, law, [law.theta], law.theta)
        g1, g2 = law.functional(law.theta_hat)
        self.assertAlmostEqual(p[0], stats.norm.cdf(samples @ g1 + g2).mean(), places=10)
        self.assertAlmostEqual(ess[0], 200.0, places=8)

    def test_chain_pvalue_agrees_with_sov(self):
        record = single_variable_record()
        theta = record.beta_hat[0] - np.sqrt(record.Sigma[0, 0])
        exact = pvalue(record, [1.0], theta, replicate_set(1, 64, 2, seed=0)).value
        chain = hit_and_run_pvalue(record, [1.0], theta, HitAndRunConfig(n=20000, seed=2), anchor=theta)
        self.assertAlmostEqual(chain, exact, delta=0.02)

    def test_chain_intervals_report_every_variable(self):
        record = strong_record()
        report = hit_and_run_intervals(record, 0.05, HitAndRunConfig(n=2000, seed=1))
        self.assertEqual(report.method, 'hit-and-run')
        self.assertEqual(len(report), 3)
        for entry in report:
            self.assertFalse(entry.lower > entry.upper)
            self.assertGreater(entry.min_ess, 0.0)


class TestSamplerFactory(unittest.TestCase):

    def test_sov_kind(self):
        sampler = truncated_sampler('sov', n=64, seed=1)
        self.assertIsInstance(sampler, SovSampler)

    def test_hit_and_run_kind(self):
        sampler = truncated_sampler('hit-and-run', n=64, seed=1, burn_in=3)
        self.assertIsInstance(sampler, HitAndRunSampler)
        self.assertEqual(sampler.cfg.burn_in, 3)

    def test_unknown_kind_raises_notsupported(self):
        with self.assertRaises(PyselinfNotSupportedError):
            truncated_sampler('gibbs')

    def test_base_class_draw_raises_notimplemented(self):
        with self.assertRaises(NotImplementedError):
            TruncatedGaussianSampler().draw(None)

    def test_sov_tails_match_the_exact_pvalues(self):
        record = single_variable_record()
        law = conditional_law(record, [1.0], record.beta_hat[0] - 0.5 * np.sqrt(record.Sigma[0, 0]))
        reps = replicate_set(1, 64, 2, seed=0)
        sampler = truncated_sampler('sov', n=64, seed=1)
        lower, upper = sampler.tails(law, law.theta_hat)
        self.assertAlmostEqual(lower, pvalue(record, [1.0], law.theta, reps, 'less').value, places=10)
        self.assertAlmostEqual(upper, pvalue(record, [1.0], law.theta, reps, 'greater').value, places=10)
        self.assertAlmostEqual(sampler.two_sided_pvalue(law, law.theta_hat), 2.0 * min(lower, upper), places=12)

    def test_base_two_sided_pvalue_folds_the_pivot(self):
        sampler = truncated_sampler('hit-and-run', n=16, seed=1)
        with patch.object(sampler, 'pivot', return_value=0.9) as mock_pivot:
            self.assertAlmostEqual(sampler.two_sided_pvalue('law', 0.0, 'og'), 0.2)
            mock_pivot.assert_called_once_with('law', 0.0, 'og')

    def test_both_samplers_estimate_the_same_pivot(self):
        record = single_variable_record()
        law = conditional_law(record, [1.0], record.beta_hat[0])
        exact = pvalue(record, [1.0], law.theta, replicate_set(1, 64, 2, seed=0)).value
        sov = truncated_sampler('sov', n=256, seed=1).pivot(law, law.theta_hat)
        chain = truncated_sampler('hit-and-run', n=20000, seed=1).pivot(law, law.theta_hat)
        self.assertAlmostEqual(sov, exact, places=10)
        self.assertAlmostEqual(chain, exact, delta=0.02)
