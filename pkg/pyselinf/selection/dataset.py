"""
Regression data and randomization specifications
"""
from dataclasses import dataclass
from logging import getLogger

import numpy as np

from ..pyselinf_errors import NonFiniteData, ShapeMismatch, RankDeficient, PyselinfConfigError
from ..util.linalg import as_sym_matrix, cholesky


@dataclass(frozen=True)
class Dataset(object):
    """
    Design matrix, response and optionally the known noise variance

    :param X: design of shape (n, p)
    :param Y: response of length n
    :param sigma2: noise variance, None when unknown
    """
    X: np.ndarray
    Y: np.ndarray
    sigma2: float = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.ravel(np.asarray(self.Y, dtype=float))
        if X.ndim != 2:
            raise ShapeMismatch("Design must be two-dimensional, got shape {}".format(X.shape))
        if X.shape[0] != Y.size:
            raise ShapeMismatch("Design has {} rows but response has {} entries".format(X.shape[0], Y.size))
        if X.shape[0] < 2 or X.shape[1] < 1:
            raise ShapeMismatch("Need n >= 2 and p >= 1, got shape {}".format(X.shape))
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise NonFiniteData("Dataset contains non-finite entries")
        if self.sigma2 is not None and not self.sigma2 > 0:
            raise ValueError("Noise variance must be positive, got {}".format(self.sigma2))
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'Y', Y)

    @property
    def n(self):
        """Number of observations"""
        return self.X.shape[0]

    @property
    def p(self):
        """Number of features"""
        return self.X.shape[1]

    def subset(self, rows):
        """
        Dataset restricted to the given rows, keeping the noise variance

        :param rows: row indices
        """
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.X[rows], self.Y[rows], self.sigma2)

    def with_sigma2(self, sigma2):
        """Copy with a noise variance attached"""
        return Dataset(self.X, self.Y, sigma2)


def estimate_sigma2(data):
    """
    Residual variance of the full least-squares fit

    ||Y - X (X^T X)^-1 X^T Y||^2 / (n - p)

    :param data: dataset with n > p
    :return: variance estimate
    :raises RankDeficient: if n <= p or X lacks full column rank
    """
    logger = getLogger(__name__)
    if data.n <= data.p:
        raise RankDeficient("Noise variance estimate needs n > p, got n={} p={}".format(data.n, data.p))
    coef, _, rank, _ = np.linalg.lstsq(data.X, data.Y, rcond=None)
    if rank < data.p:
        raise RankDeficient("Design has rank {} < p = {}".format(rank, data.p))
    residual = data.Y - data.X @ coef
    sigma2 = float(residual @ residual / (data.n - data.p))
    logger.debug("Estimated noise variance %.6g", sigma2)
    return sigma2


@dataclass(frozen=True)
class RandomizationSpec(object):
    """
    Covariance of the Gaussian randomization omega

    Either an explicit p x p covariance, or Omega = sigma^2 X^T X / kappa
    with kappa > 0.  Data carving with fraction rho is the proportional case
    with kappa = rho / (1 - rho).

    :param kind: 'explicit' or 'proportional'
    :param omega_cov: covariance for the explicit kind
    :param kappa: proportionality constant for the proportional kind
    """
    kind: str
    omega_cov: np.ndarray = None
    kappa: float = None

    KINDS = ('explicit', 'proportional')

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise PyselinfConfigError("Unknown randomization kind '{}'".format(self.kind))
        if self.kind == 'explicit':
            if self.omega_cov is None:
                raise PyselinfConfigError("Explicit randomization needs a covariance")
            cov = as_sym_matrix(self.omega_cov, "randomization covariance")
            cholesky(cov)
            object.__setattr__(self, 'omega_cov', cov)
        elif self.kappa is None or not self.kappa > 0:
            raise PyselinfConfigError("Proportional randomization needs kappa > 0, got {}".format(self.kappa))

    @classmethod
    def explicit(cls, omega_cov):
        """Randomization with a given covariance"""
        return cls(kind='explicit', omega_cov=omega_cov)

    @classmethod
    def proportional(cls, kappa):
        """Randomization with covariance sigma^2 X^T X / kappa"""
        return cls(kind='proportional', kappa=float(kappa))

    @classmethod
    def carving(cls, rho):
        """
        Asymptotic randomization of data carving with selection fraction rho

        :param rho: fraction of rows used for selection, 0 < rho < 1
        """
        if not 0.0 < rho < 1.0:
            raise PyselinfConfigError("Carving fraction must lie in (0, 1), got {}".format(rho))
        return cls.proportional(rho / (1.0 - rho))

    @property
    def is_proportional(self):
        """True when Omega is a multiple of sigma^2 X^T X"""
        return self.kind == 'proportional'

    @property
    def rho(self):
        """Carving fraction matching kappa, None for explicit covariances"""
        if not self.is_proportional:
            return None
        return self.kappa / (1.0 + self.kappa)

    def covariance(self, X, sigma2):
        """
        Randomization covariance for a design

        :param X: design of shape (n, p)
        :param sigma2: noise variance
        """
        if self.is_proportional:
            return sigma2 * (X.T @ X) / self.kappa
        return self.omega_cov
