"""Base class for samplers of orthant-truncated Gaussians."""
from logging import getLogger

import numpy as np

from ..sov.orthant import OrthantGaussian
from ..sov.estimators import normalized_weights
from ..util.special import norm_cdf


class TruncatedGaussianSampler(object):
    """
    Draws weighted samples from N(mu, Sigma) restricted to the positive orthant

    Sub-classes implement :meth:`draw`; the pivot of a conditional law is then
    the self-normalised average of Phi(g1^T b + g2) over the draws.
    """

    def __init__(self):
        self.logger = getLogger(__name__)

    def draw(self, og):
        """Raise error as this method needs to be overridden."""
        raise NotImplementedError("method needs to be defined by sub-class")

    def prepare(self, og):
        """
        Set-up work on og that is not part of drawing, none by default

        :param og: orthant Gaussian
        """

    def orthant(self, law):
        """
        Orthant Gaussian the sampler targets for a conditional law

        :param law: :class:`pyselinf.inference.laws.ConditionalLaw`
        """
        return OrthantGaussian.natural(law.mu_b, law.Sigma_b)

    def pivot(self, law, x, og=None):
        """
        Conditional CDF of the contrast at x

        :param law: conditional law
        :param x: evaluation point
        :param og: orthant Gaussian of the law, default :meth:`orthant`
        :return: estimate in [0, 1]
        """
        og = self.orthant(law) if og is None else og
        samples, weights = self.draw(og)
        g1, g2 = law.functional(x)
        with np.errstate(divide='ignore'):
            weights = normalized_weights(np.log(weights))
        value = weights @ norm_cdf(samples @ g1 + g2) / weights.sum()
        return float(np.clip(value, 0.0, 1.0))

    def two_sided_pvalue(self, law, x, og=None):
        """
        2 min(F, 1 - F) from the pivot at x

        :param law: conditional law
        :param x: evaluation point
        :param og: orthant Gaussian of the law, default :meth:`orthant`
        """
        value = self.pivot(law, x, og)
        return 2.0 * min(value, 1.0 - value)
