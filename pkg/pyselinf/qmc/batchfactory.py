"""
Factory for point batches and replicate sets
"""
from logging import getLogger

import numpy as np

from ..pyselinf_errors import PyselinfNotSupportedError
from .pointbatch import ReplicateSet, sobol_batch, pseudo_random_batch

GENERATORS = ('sobol', 'pseudo-random')


def child_seeds(seed, count):
    """
    Derive independent 64-bit seeds from a master seed

    :param seed: master seed
    :param count: number of child seeds
    :return: list of distinct integers
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def point_batch(d, n, seed, generator='sobol'):
    """
    Dispatch a point batch for the generator in question

    Example drawing a scrambled Sobol' batch of 256 points in 5 dimensions::

        from pyselinf.qmc.batchfactory import point_batch
        batch = point_batch(5, 256, seed=11)

    :param d: dimension
    :param n: number of points
    :param seed: 64-bit integer seed
    :param generator: 'sobol' (default) or 'pseudo-random'
    :type generator: string
    :rtype: :class:`pyselinf.qmc.pointbatch.PointBatch`
    :raises PyselinfNotSupportedError: if the generator is not supported
    """
    logger = getLogger(__name__)
    if generator == 'sobol':
        return sobol_batch(d, n, seed)
    if generator == 'pseudo-random':
        return pseudo_random_batch(d, n, seed)

    msg = "Point generator '{0}' not implemented.".format(generator)
    logger.error(msg)
    raise PyselinfNotSupportedError(msg)


def replicate_set(d, n, r, seed, generator='sobol'):
    """
    R independent batches with seeds spawned from a master seed

    :param d: dimension
    :param n: points per replicate
    :param r: number of replicates, >= 1
    :param seed: master seed
    :param generator: 'sobol' or 'pseudo-random'
    :rtype: :class:`pyselinf.qmc.pointbatch.ReplicateSet`
    """
    if int(r) != r or r < 1:
        raise ValueError("Replicate count must be a positive integer, got {}".format(r))
    batches = tuple(point_batch(d, n, child, generator) for child in child_seeds(seed, int(r)))
    return ReplicateSet(batches=batches)
