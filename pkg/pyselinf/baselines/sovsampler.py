"""SOV sampler driven by one randomized point batch."""
import numpy as np

from ..qmc.batchfactory import point_batch
from ..sov.orthant import functional_orthant, gibson_reorder, sov_transform, LinearGaussianFunctional
from ..sov.estimators import replicate_ratios, tail_ratios
from .samplerbase import TruncatedGaussianSampler


class SovSampler(TruncatedGaussianSampler):
    """
    Weighted SOV draws from one point batch

    :param n: number of points
    :param seed: batch seed
    :param generator: 'sobol' or 'pseudo-random'
    :param preintegrate: integrate the last variable out when evaluating pivots
    """

    def __init__(self, n, seed, generator='sobol', preintegrate=True):
        super(SovSampler, self).__init__()
        self.n = n
        self.seed = seed
        self.generator = generator
        self.preintegrate = preintegrate

    def orthant(self, law):
        return gibson_reorder(law.mu_b, law.Sigma_b)

    def draw(self, og):
        """
        :param og: orthant Gaussian
        :return: tuple (samples of shape (n, d), SOV weights)
        """
        sb = sov_transform(og, point_batch(og.d, self.n, self.seed, self.generator))
        return sb.b, sb.weight

    def pivot(self, law, x, og=None):
        og = self.orthant(law) if og is None else og
        g1, g2 = law.functional(x)
        fnl = LinearGaussianFunctional.from_b_space(og, g1, g2)
        batch = point_batch(og.d, self.n, self.seed, self.generator)
        return float(np.clip(replicate_ratios(og, fnl, batch, self.preintegrate)[0], 0.0, 1.0))

    def tails(self, law, x, og=None):
        """
        Lower and upper tail of the conditional law at x, each from its own SOV pass

        :param law: conditional law
        :param x: evaluation point
        :param og: orthant Gaussian of the law, default :meth:`orthant`
        :return: array (F(x), 1 - F(x))
        """
        og = self.orthant(law) if og is None else og
        g1, g2 = law.functional(x)
        tail_ogs = [functional_orthant(law.mu_b, law.Sigma_b, g1, g2, upper) for upper in (False, True)]
        batch = point_batch(og.d, self.n, self.seed, self.generator)
        return tail_ratios(og, tail_ogs, batch, self.preintegrate)[0]

    def two_sided_pvalue(self, law, x, og=None):
        return float(min(2.0 * np.min(self.tails(law, x, og)), 1.0))
