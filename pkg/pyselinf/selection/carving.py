"""
Data carving

Selection runs on a random fraction rho of the rows; inference uses all
rows.  The carving lasso is solved in the scaled form

    (1/(2 rho)) ||Y1 - X1 beta||^2 + lambda ||beta||_1

whose KKT conditions, written on the full data, are those of a randomized
lasso with omega = -X^T (Y - X beta) + (1/rho) X1^T (Y1 - X1 beta).
Asymptotically omega has covariance ((1 - rho)/rho) sigma^2 X^T X.
"""
from dataclasses import dataclass
from logging import getLogger

import numpy as np

from ..pyselinf_errors import PyselinfConfigError
from .dataset import Dataset, RandomizationSpec
from .lasso import solve_randomized_lasso
from .kkt import extract_kkt


@dataclass(frozen=True)
class CarvingSplit(object):
    """
    A selection/hold-out partition of the rows

    :param data: full dataset
    :param rho: selection fraction
    :param selection_rows: sorted selection row indices
    :param holdout_rows: sorted hold-out row indices
    """
    data: Dataset
    rho: float
    selection_rows: np.ndarray
    holdout_rows: np.ndarray

    @property
    def selection(self):
        """Dataset of the selection rows"""
        return self.data.subset(self.selection_rows)

    @property
    def quad_scale(self):
        """Scale 1/rho of the selection loss"""
        return 1.0 / self.rho

    @property
    def spec(self):
        """Asymptotic randomization of the split"""
        return RandomizationSpec.carving(self.rho)

    def randomization(self, beta_lasso):
        """
        Realised randomization of the carving lasso solution

        :param beta_lasso: solution of the scaled lasso on the selection rows
        """
        X = self.data.X
        X1 = X[self.selection_rows]
        Y1 = self.data.Y[self.selection_rows]
        return -X.T @ (self.data.Y - X @ beta_lasso) + X1.T @ (Y1 - X1 @ beta_lasso) / self.rho


def carve_split(data, rho, seed):
    """
    Random split of the rows into floor(rho n) selection rows and the rest

    :param data: full dataset
    :param rho: selection fraction, 0 < rho < 1
    :param seed: split seed
    :rtype: :class:`CarvingSplit`
    :raises PyselinfConfigError: if either part would be empty
    """
    if not 0.0 < rho < 1.0:
        raise PyselinfConfigError("Carving fraction must lie in (0, 1), got {}".format(rho))
    n1 = int(np.floor(rho * data.n))
    if n1 < 1 or n1 >= data.n:
        raise PyselinfConfigError("Carving fraction {} leaves an empty part of {} rows".format(rho, data.n))
    order = np.random.default_rng(seed).permutation(data.n)
    return CarvingSplit(data=data, rho=float(rho), selection_rows=np.sort(order[:n1]),
                        holdout_rows=np.sort(order[n1:]))


def carve_and_select(data, lam, rho, seed, target='submodel', sigma2=None):
    """
    Split, solve the carving lasso and extract the selection record

    :param data: full dataset
    :param lam: penalty on the unnormalised scale
    :param rho: selection fraction
    :param seed: split seed
    :param target: 'submodel' or 'full'
    :param sigma2: noise variance, defaults to data.sigma2
    :rtype: :class:`pyselinf.selection.kkt.SelectionRecord`
    """
    # pylint: disable=too-many-arguments
    logger = getLogger(__name__)
    split = carve_split(data, rho, seed)
    beta_lasso = solve_randomized_lasso(split.selection, lam, np.zeros(data.p), quad_scale=split.quad_scale)
    omega = split.randomization(beta_lasso)
    logger.debug("Carving split: %d selection rows, %d hold-out rows",
                 split.selection_rows.size, split.holdout_rows.size)
    return extract_kkt(data, lam, omega, beta_lasso, split.spec, target=target, holdout=split.holdout_rows,
                       sigma2=sigma2)
