"""
SOV estimators of orthant probabilities, conditional CDFs and truncated moments

Every estimator runs once per replicate batch and combines the replicate
values by their mean; the standard error is the spread of the replicate
values divided by sqrt(R).  Weights are normalised by their per-replicate
maximum in log space, which leaves every ratio unchanged.
"""
from collections import namedtuple
from logging import getLogger

import numpy as np
from scipy.special import logsumexp

from ..pyselinf_errors import DegenerateDenominator, InsufficientReplicates, ShapeMismatch
from ..util.special import bvn_prob, norm_cdf, preintegrate_last
from .orthant import sov_transform

McEstimate = namedtuple('McEstimate', ['value', 'stderr'])


def replicate_batches(reps):
    """Batches of a replicate set; a bare PointBatch counts as a single replicate"""
    return list(reps) if hasattr(reps, 'batches') else [reps]


def replicate_summary(values, require_stderr=True):
    """
    Mean and standard error of replicate values

    :param values: one value per replicate
    :param require_stderr: raise when the standard error cannot be formed
    :return: :data:`McEstimate`; stderr is NaN for a single replicate when not required
    :raises InsufficientReplicates: if require_stderr and fewer than two values
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        if require_stderr:
            raise InsufficientReplicates("Standard error needs at least 2 replicates, got {}".format(values.size))
        return McEstimate(float(values.mean()), float('nan'))
    return McEstimate(float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size)))


def normalized_weights(log_weight):
    """
    Weights scaled so the largest equals one

    :param log_weight: log weights
    :raises DegenerateDenominator: if no weight is positive and finite
    """
    log_weight = np.asarray(log_weight, dtype=float)
    if log_weight.size == 0 or not np.any(np.isfinite(log_weight)):
        raise DegenerateDenominator("Every importance weight vanished")
    return np.exp(log_weight - np.max(log_weight[np.isfinite(log_weight)]))


def effective_sample_size(log_weight):
    """
    Effective sample size (sum w)^2 / sum w^2

    :param log_weight: log weights
    """
    w = normalized_weights(log_weight)
    return float(w.sum() ** 2 / np.sum(w * w))


def weighted_moments(samples, log_weight):
    """
    Self-normalised mean and covariance of weighted samples

    :param samples: array (N, d)
    :param log_weight: log weight per sample
    :return: tuple (mean, cov)
    """
    w = normalized_weights(log_weight)
    w = w / w.sum()
    mean = w @ samples
    centred = samples - mean
    cov = (centred * w[:, None]).T @ centred
    return mean, 0.5 * (cov + cov.T)


def orthant_prob(og, reps, require_stderr=True):
    """
    Orthant probability P(b > 0) for b ~ N(mu, Sigma)

    :param og: :class:`pyselinf.sov.orthant.OrthantGaussian`
    :param reps: :class:`pyselinf.qmc.pointbatch.ReplicateSet`
    :param require_stderr: raise InsufficientReplicates with a single replicate
    :return: :data:`McEstimate`
    """
    values = [sov_transform(og, batch).weight.mean() for batch in replicate_batches(reps)]
    return replicate_summary(values, require_stderr)


def log_orthant_prob(og, reps):
    """
    Logarithm of the replicate-averaged orthant probability estimate

    Computed without forming the probability, so it stays finite far below
    the double-precision range.

    :param og: orthant Gaussian
    :param reps: replicate set
    :rtype: float
    """
    batches = replicate_batches(reps)
    logs = []
    for batch in batches:
        lw = sov_transform(og, batch).log_weight
        logs.append(logsumexp(lw) - np.log(lw.size))
    return float(logsumexp(logs) - np.log(len(logs)))


def replicate_ratios(og, fnl, reps, preintegrate=True):
    """
    Per-replicate estimates of E[Phi(g1^T z + g2) | b > 0]

    :param og: orthant Gaussian
    :param fnl: :class:`pyselinf.sov.orthant.LinearGaussianFunctional` in the order of og
    :param reps: replicate set
    :param preintegrate: integrate the last variable out analytically
    :return: array with one ratio per replicate
    :raises DegenerateDenominator: if every SOV weight of a replicate vanished
    """
    logger = getLogger(__name__)
    slope = np.asarray(fnl.slope, dtype=float)
    ratios = []
    for batch in replicate_batches(reps):
        sb = sov_transform(og, batch)
        lw = sb.log_weight
        w = normalized_weights(lw)
        shift = np.max(lw)
        if preintegrate:
            partial = sb.z[:, :-1] @ slope[:-1] + fnl.intercept
            inner = preintegrate_last(slope[-1], partial, sb.lower[:, -1])
            numerator = np.exp(sb.log_prefix_weight - shift) * inner
        else:
            numerator = w * norm_cdf(sb.z @ slope + fnl.intercept)
        ratios.append(numerator.sum() / w.sum())
    ratios = np.clip(np.asarray(ratios), 0.0, 1.0)
    logger.debug("CDF ratios over %d replicates, spread %.3g", ratios.size, np.ptp(ratios))
    return ratios


def cdf_estimate(og, fnl, reps, preintegrate=True, require_stderr=True):
    """
    Conditional CDF value with replicate standard error

    :param og: orthant Gaussian
    :param fnl: linear functional in the order of og
    :param reps: replicate set
    :param preintegrate: integrate the last variable out analytically
    :param require_stderr: raise InsufficientReplicates with a single replicate
    :return: :data:`McEstimate` with value clamped to [0, 1]
    """
    return replicate_summary(replicate_ratios(og, fnl, reps, preintegrate), require_stderr)


def orthant_log_weights(og, batch, preintegrate=True):
    """
    Log SOV weights of one batch for the orthant probability

    With preintegrate the last two variables of the transform order are
    integrated out together through the bivariate normal distribution, so a
    two-dimensional orthant probability is exact.

    :param og: orthant Gaussian
    :param batch: point batch of dimension >= d - 1
    :return: log weight per point
    """
    sb = sov_transform(og, batch)
    if not preintegrate or og.d < 2:
        return sb.log_weight
    k = og.d - 2
    L = og.chol
    mu = og.mean_permuted
    prefix = sb.z[:, :k]
    sd_last = np.hypot(L[k + 1, k], L[k + 1, k + 1])
    upper_first = (mu[k] + prefix @ L[k, :k]) / L[k, k]
    upper_last = (mu[k + 1] + prefix @ L[k + 1, :k]) / sd_last
    pair = bvn_prob(upper_first, upper_last, L[k + 1, k] / sd_last)
    with np.errstate(divide='ignore'):
        return sb.log_sf[:, :k].sum(axis=1) + np.log(pair)


def tail_ratios(og, tail_ogs, reps, preintegrate=True):
    """
    Per-replicate ratios of augmented orthant probabilities to P(b > 0)

    Each tail is estimated by its own SOV pass, so a small tail keeps its
    relative precision instead of being read off as one minus a large value.

    :param og: orthant Gaussian of b
    :param tail_ogs: orthant Gaussians built by :func:`pyselinf.sov.orthant.functional_orthant`
    :param reps: replicate set of dimension >= d
    :param preintegrate: integrate the last two variables out analytically
    :return: array of shape (R, len(tail_ogs)) clamped to [0, 1]
    :raises DegenerateDenominator: if every SOV weight of a replicate vanished
    """
    ratios = []
    for batch in replicate_batches(reps):
        den = orthant_log_weights(og, batch, preintegrate)
        if not np.any(np.isfinite(den)):
            raise DegenerateDenominator("Every importance weight vanished")
        log_den = logsumexp(den)
        row = []
        for tail_og in tail_ogs:
            num = orthant_log_weights(tail_og, batch, preintegrate)
            row.append(np.exp(logsumexp(num) - log_den) if np.any(np.isfinite(num)) else 0.0)
        ratios.append(row)
    return np.clip(np.asarray(ratios, dtype=float), 0.0, 1.0)


def truncated_moments_replicates(og, reps):
    """
    Per-replicate self-normalised moments of the truncated Gaussian

    :param og: orthant Gaussian
    :param reps: replicate set with full d-dimensional batches
    :return: tuple (means of shape (R, d), covariances of shape (R, d, d))
    """
    means = []
    covs = []
    for batch in replicate_batches(reps):
        if np.shape(getattr(batch, 'points', batch))[1] < og.d:
            raise ShapeMismatch("Moment estimation needs {}-dimensional batches".format(og.d))
        sb = sov_transform(og, batch)
        mean, cov = weighted_moments(sb.b, sb.log_weight)
        means.append(mean)
        covs.append(cov)
    return np.asarray(means), np.asarray(covs)


def truncated_moments(og, reps):
    """
    Mean and covariance of N(mu, Sigma) restricted to the orthant

    :param og: orthant Gaussian
    :param reps: replicate set with full d-dimensional batches
    :return: tuple (mean, cov), covariance symmetrised
    """
    means, covs = truncated_moments_replicates(og, reps)
    cov = covs.mean(axis=0)
    return means.mean(axis=0), 0.5 * (cov + cov.T)
