"""
Point batches for randomized quasi-Monte Carlo integration

A :class:`PointBatch` holds N points of the unit cube [0, 1)^d.  Randomized
Sobol' batches use scipy's Owen-type linear matrix scramble followed by a
digital shift, so every point is marginally uniform while the batch keeps the
low-discrepancy structure.
"""
from dataclasses import dataclass, field
from logging import getLogger

import numpy as np
from scipy.stats import qmc

from ..pyselinf_errors import UnsupportedDimension, InsufficientReplicates

# Dimension cap for Sobol' batches; scipy bundles Joe-Kuo direction numbers beyond it
MAX_SOBOL_DIMENSION = 1024
# Largest supported batch, 2^24 points
MAX_SOBOL_POINTS = 1 << 24


@dataclass(frozen=True)
class PointBatch(object):
    """
    N points of [0, 1)^d with the generator that produced them

    :param points: array of shape (N, d)
    :param generator: 'sobol' or 'pseudo-random'
    :param seed: integer seed the batch was drawn with
    """
    points: np.ndarray
    generator: str
    seed: int

    @property
    def n(self):
        """Number of points"""
        return self.points.shape[0]

    @property
    def d(self):
        """Point dimension"""
        return self.points.shape[1]


@dataclass(frozen=True)
class ReplicateSet(object):
    """
    R independently randomized batches of a common size and dimension

    :param batches: tuple of :class:`PointBatch`
    """
    batches: tuple = field(default_factory=tuple)

    def __post_init__(self):
        shapes = {batch.points.shape for batch in self.batches}
        if len(shapes) > 1:
            raise ValueError("Replicate batches differ in shape: {}".format(sorted(shapes)))

    def __iter__(self):
        return iter(self.batches)

    def __len__(self):
        return len(self.batches)

    @property
    def r(self):
        """Number of replicates"""
        return len(self.batches)

    @property
    def n(self):
        """Points per replicate"""
        return self.batches[0].n

    @property
    def d(self):
        """Point dimension"""
        return self.batches[0].d

    def require_stderr(self):
        """
        Check that a standard error can be formed from the replicates

        :raises InsufficientReplicates: if fewer than two replicates are held
        """
        if self.r < 2:
            raise InsufficientReplicates("Standard error needs at least 2 replicates, got {}".format(self.r))


def _check_size(d, n):
    if int(d) != d or d < 1:
        raise ValueError("Point dimension must be a positive integer, got {}".format(d))
    if int(n) != n or n < 1:
        raise ValueError("Batch size must be a positive integer, got {}".format(n))


def _sobol_engine(d, scramble, rng):
    # scipy >= 1.15 names the generator argument 'rng'
    try:
        return qmc.Sobol(d, scramble=scramble, rng=rng)
    except TypeError:
        return qmc.Sobol(d, scramble=scramble, seed=rng)


def sobol_batch(d, n, seed, scramble=True):
    """
    Randomized Sobol' batch

    :param d: dimension, 1 <= d <= 1024
    :param n: number of points, a power of two no larger than 2^24
    :param seed: 64-bit integer seed
    :param scramble: apply the linear matrix scramble and digital shift
    :return: the batch
    :rtype: :class:`PointBatch`
    :raises UnsupportedDimension: if d exceeds the direction-number table
    :raises ValueError: if n is not a power of two
    """
    logger = getLogger(__name__)
    _check_size(d, n)
    if d > MAX_SOBOL_DIMENSION:
        msg = "Sobol' points support at most {} dimensions, got {}".format(MAX_SOBOL_DIMENSION, d)
        logger.error(msg)
        raise UnsupportedDimension(msg)
    if n & (n - 1) or n > MAX_SOBOL_POINTS:
        raise ValueError("Sobol' batch size must be a power of two up to 2^24, got {}".format(n))
    engine = _sobol_engine(int(d), scramble, np.random.default_rng(seed))
    points = engine.random_base2(int(n).bit_length() - 1)
    logger.debug("Drew Sobol' batch d=%d N=%d seed=%d", d, n, seed)
    return PointBatch(points=points, generator='sobol', seed=int(seed))


def pseudo_random_batch(d, n, seed):
    """
    Batch of independent uniform points

    :param d: dimension
    :param n: number of points
    :param seed: 64-bit integer seed
    :rtype: :class:`PointBatch`
    """
    _check_size(d, n)
    rng = np.random.default_rng(seed)
    return PointBatch(points=rng.random((int(n), int(d))), generator='pseudo-random', seed=int(seed))
