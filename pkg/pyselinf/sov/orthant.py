"""
Orthant-truncated Gaussians and the separation-of-variable transform

A Gaussian N(mu, Sigma) restricted to the positive orthant is described by an
:class:`OrthantGaussian`, which keeps the variable ordering chosen for the
sequential transform and the Cholesky factor of the reordered covariance.
:func:`sov_transform` maps unit-cube points onto the orthant, one variable at
a time, and returns the samples together with their SOV weights.
"""
from dataclasses import dataclass
from logging import getLogger

import numpy as np
from scipy.special import ndtri

from ..pyselinf_errors import NotPositiveDefinite, ShapeMismatch
from ..util.linalg import as_sym_matrix, cholesky
from ..util.special import norm_cdf, norm_sf, log_norm_sf, trunc_norm_moments_1d
from ..util.print_helpers import index_list_to_string

# Standardised truncation points are clamped to [-A_MAX, A_MAX] before the draw
A_MAX = 37.0
# Cube coordinates are clamped to [U_EPS, 1 - U_EPS]
U_EPS = 2.0 ** -53


@dataclass(frozen=True)
class OrthantGaussian(object):
    """
    N(mean, cov) restricted to {b > 0} with a fixed variable ordering

    :param mean: mean vector in the original variable order
    :param cov: covariance in the original variable order
    :param perm: permutation; position k of the sequential transform holds variable perm[k]
    :param chol: lower Cholesky factor of cov[perm][:, perm]
    """
    mean: np.ndarray
    cov: np.ndarray
    perm: np.ndarray
    chol: np.ndarray

    @classmethod
    def natural(cls, mean, cov):
        """
        Build without reordering

        :param mean: mean vector
        :param cov: positive-definite covariance
        :raises NotPositiveDefinite: if cov is not positive-definite
        """
        mean, cov = _check_instance(mean, cov)
        return cls(mean=mean, cov=cov, perm=np.arange(mean.size), chol=cholesky(cov))

    @property
    def d(self):
        """Dimension"""
        return self.mean.size

    @property
    def mean_permuted(self):
        """Mean in the transform order"""
        return self.mean[self.perm]

    def with_mean(self, mean):
        """
        Same covariance, ordering and factor with a new mean

        :param mean: new mean vector in the original order
        """
        mean = np.asarray(mean, dtype=float)
        if mean.shape != self.mean.shape:
            raise ShapeMismatch("Mean has shape {}, expected {}".format(mean.shape, self.mean.shape))
        return OrthantGaussian(mean=mean, cov=self.cov, perm=self.perm, chol=self.chol)


@dataclass(frozen=True)
class LinearGaussianFunctional(object):
    """
    Affine functional g1^T z + g2 of the standardised variables z

    :param slope: slope g1 in the transform order of an :class:`OrthantGaussian`
    :param intercept: intercept g2
    """
    slope: np.ndarray
    intercept: float

    def __post_init__(self):
        if not (np.all(np.isfinite(self.slope)) and np.isfinite(self.intercept)):
            raise ValueError("Functional coefficients must be finite")

    @classmethod
    def from_b_space(cls, og, g1, g2):
        """
        Express h1^T b + h2 in terms of z where b = L z + mu

        :param og: the orthant Gaussian fixing the order and factor
        :param g1: slope on b in the original order
        :param g2: intercept on b
        """
        g1 = np.asarray(g1, dtype=float)
        g1_perm = g1[og.perm]
        return cls(slope=og.chol.T @ g1_perm, intercept=float(g2 + g1 @ og.mean))


@dataclass(frozen=True)
class SovBatch(object):
    """
    Cube points pushed onto the orthant by the sequential transform

    :param og: source orthant Gaussian
    :param points: the source cube points, shape (N, >= d-1)
    :param z: standardised draws in the transform order, shape (N, d)
    :param b: orthant draws in the original order, shape (N, d)
    :param lower: realised truncation points a_k in the transform order, shape (N, d)
    :param log_sf: log(1 - Phi(a_k)), shape (N, d)
    """
    og: OrthantGaussian
    points: np.ndarray
    z: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    log_sf: np.ndarray

    @property
    def n(self):
        """Number of samples"""
        return self.z.shape[0]

    @property
    def log_weight(self):
        """Log SOV weight per sample"""
        return self.log_sf.sum(axis=1)

    @property
    def weight(self):
        """SOV weight per sample, in [0, 1]"""
        return np.exp(self.log_weight)

    @property
    def log_prefix_weight(self):
        """Log of the product of the first d-1 SOV factors"""
        return self.log_sf[:, :-1].sum(axis=1)


def _check_instance(mean, cov):
    mean = np.ravel(np.asarray(mean, dtype=float))
    cov = as_sym_matrix(cov, "covariance")
    if cov.shape[0] != mean.size:
        raise ShapeMismatch("Mean of length {} does not match covariance {}".format(mean.size, cov.shape))
    if mean.size == 0:
        raise ShapeMismatch("Orthant Gaussian needs at least one variable")
    if not np.all(np.isfinite(mean)):
        raise ValueError("Mean must be finite")
    return mean, cov


def gibson_reorder(mu, Sigma):
    """
    Greedy variable ordering with an incrementally built Cholesky factor

    At step k the unplaced variable with the smallest conditional probability
    of exceeding its bound is placed next; placed variables enter the
    conditioning through their truncated means.

    :param mu: mean vector
    :param Sigma: positive-definite covariance
    :return: the reordered instance
    :rtype: :class:`OrthantGaussian`
    :raises NotPositiveDefinite: if a conditional variance falls below tolerance
    """
    logger = getLogger(__name__)
    mean, cov = _check_instance(mu, Sigma)
    dim = mean.size
    perm = np.arange(dim)
    m = mean.copy()
    C = cov.copy()
    L = np.zeros((dim, dim))
    y = np.zeros(dim)
    floor = dim * np.finfo(float).eps * np.max(np.diag(cov))

    for i in range(dim):
        cond_var = np.diag(C)[i:] - np.sum(L[i:, :i] ** 2, axis=1)
        if np.any(cond_var <= floor):
            raise NotPositiveDefinite("Conditional variance below tolerance at step {}".format(i))
        cond_sd = np.sqrt(cond_var)
        bound = (-m[i:] - L[i:, :i] @ y[:i]) / cond_sd
        # Largest lower bound = smallest exceedance probability
        j = i + int(np.argmax(bound))
        if j != i:
            perm[[i, j]] = perm[[j, i]]
            m[[i, j]] = m[[j, i]]
            C[[i, j], :] = C[[j, i], :]
            C[:, [i, j]] = C[:, [j, i]]
            L[[i, j], :i] = L[[j, i], :i]
        pivot = cond_sd[j - i]
        L[i, i] = pivot
        if i + 1 < dim:
            L[i + 1:, i] = (C[i + 1:, i] - L[i + 1:, :i] @ L[i, :i]) / pivot
        y[i] = trunc_norm_moments_1d(0.0, 1.0, bound[j - i])[0]

    logger.debug("Gibson order %s", index_list_to_string(perm))
    return OrthantGaussian(mean=mean, cov=cov, perm=perm, chol=L)


def _conditional_draw(a, u):
    # z = Phi^-1(Phi(a) + u (1 - Phi(a))), evaluated through the upper tail above the median
    sf = norm_sf(a)
    p = norm_cdf(a) + u * sf
    q = (1.0 - u) * sf
    with np.errstate(divide='ignore'):
        return np.where(p > 0.5, -ndtri(q), ndtri(p))


def sov_transform(og, batch):
    """
    Map cube points onto the orthant with SOV weights

    Accepts batches of dimension d or d-1.  With d-1 coordinates the last
    variable is drawn at its conditional median; estimators that integrate
    the last variable out analytically do not depend on it.

    :param og: orthant Gaussian
    :param batch: :class:`pyselinf.qmc.pointbatch.PointBatch` or an (N, k) array
    :rtype: :class:`SovBatch`
    :raises ShapeMismatch: if the batch dimension is below d-1
    """
    points = np.asarray(getattr(batch, 'points', batch), dtype=float)
    dim = og.d
    if points.ndim != 2 or points.shape[1] < dim - 1:
        raise ShapeMismatch("Batch dimension {} too small for d={}".format(points.shape, dim))
    n = points.shape[0]
    if points.shape[1] >= dim:
        u = points[:, :dim]
    else:
        u = np.hstack([points[:, :dim - 1], np.full((n, 1), 0.5)])
    u = np.clip(u, U_EPS, 1.0 - U_EPS)

    L = og.chol
    mu = og.mean_permuted
    z = np.zeros((n, dim))
    lower = np.zeros((n, dim))
    log_sf = np.zeros((n, dim))
    b_perm = np.zeros((n, dim))
    for k in range(dim):
        a_raw = (-mu[k] - z[:, :k] @ L[k, :k]) / L[k, k]
        a = np.clip(a_raw, -A_MAX, A_MAX)
        zk = _conditional_draw(a, u[:, k])
        # Keep draws above the unclamped bound
        zk = np.where(a_raw > A_MAX, zk + (a_raw - A_MAX), zk)
        z[:, k] = zk
        lower[:, k] = a_raw
        log_sf[:, k] = log_norm_sf(a_raw)
        b_perm[:, k] = np.maximum(L[k, k] * (zk - a_raw), np.finfo(float).tiny)

    b = np.empty_like(b_perm)
    b[:, og.perm] = b_perm
    return SovBatch(og=og, points=points, z=z, b=b, lower=lower, log_sf=log_sf)


def functional_orthant(mu, Sigma, g1, g2, upper=False):
    """
    Orthant Gaussian of (b, c) whose orthant probability is a tail of the functional

    With U standard normal and independent of b, Phi(g1^T b + g2) = P(c > 0 | b)
    for c = g1^T b + g2 - U.  The orthant probability of (b, c) is then
    E[Phi(g1^T b + g2); b > 0], and E[Phi(-(g1^T b + g2)); b > 0] with c
    negated when upper is set.  Ordering the augmented vector by
    :func:`gibson_reorder` moves a rare tail constraint to the front.

    :param mu: mean of b
    :param Sigma: covariance of b
    :param g1: slope on b in the original order
    :param g2: intercept on b
    :param upper: negate c to target the upper tail
    :rtype: :class:`OrthantGaussian`
    """
    mean, cov = _check_instance(mu, Sigma)
    g1 = np.ravel(np.asarray(g1, dtype=float))
    if g1.size != mean.size:
        raise ShapeMismatch("Slope of length {} does not match d={}".format(g1.size, mean.size))
    sign = -1.0 if upper else 1.0
    cross = sign * (cov @ g1)
    aug_mean = np.append(mean, sign * (g1 @ mean + g2))
    aug_cov = np.block([[cov, cross[:, None]],
                        [cross[None, :], np.array([[g1 @ cov @ g1 + 1.0]])]])
    return gibson_reorder(aug_mean, aug_cov)
