"""
Factory for truncated Gaussian samplers
"""
from logging import getLogger

from ..pyselinf_errors import PyselinfNotSupportedError


def truncated_sampler(kind='sov', n=4096, seed=0, burn_in=20):
    """
    Dispatch a sampler of the kind in question

    Example comparing both samplers on one law::

        from pyselinf.baselines.samplerfactory import truncated_sampler
        sov = truncated_sampler('sov', n=4096, seed=1)
        hnr = truncated_sampler('hit-and-run', n=5 * 4096, seed=1)
        print(sov.pivot(law, x), hnr.pivot(law, x))

    :param kind: 'sov' or 'hit-and-run'
    :type kind: string
    :param n: number of points or retained chain states
    :param seed: randomization seed
    :param burn_in: discarded chain states for hit-and-run
    :rtype: :class:`pyselinf.baselines.samplerbase.TruncatedGaussianSampler`
    :raises PyselinfNotSupportedError: if the kind is not supported
    """
    logger = getLogger(__name__)
    logger.debug("Sampler '%s' with %d points", kind, n)

    if kind == 'sov':
        from .sovsampler import SovSampler
        return SovSampler(n, seed)
    if kind == 'hit-and-run':
        from .hitandrun import HitAndRunConfig, HitAndRunSampler
        return HitAndRunSampler(HitAndRunConfig(n=n, burn_in=burn_in, seed=seed))

    msg = "Sampler '{0}' not implemented.".format(kind)
    logger.error(msg)
    raise PyselinfNotSupportedError(msg)
