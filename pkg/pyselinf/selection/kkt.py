"""
Selection records from the KKT conditions of the randomized lasso

At a solution with active set M, signs D and magnitudes b the KKT
conditions rearrange into the affine identity

    omega = Q1 beta_hat_M + Q2 b + r + s

with Q1 = -X^T X_M, Q2 = X^T X_M D, residual r = X^T (X_M beta_hat_M - Y) and
subgradient s.  A :class:`SelectionRecord` keeps every piece of it together
with the target statistic beta_hat_M = A_M Y and its covariance.
"""
from dataclasses import dataclass
from logging import getLogger

import numpy as np

from ..pyselinf_errors import EmptyModel, RankDeficient, NoConvergence, PyselinfConfigError
from ..util.print_helpers import index_list_to_string
from .dataset import Dataset, RandomizationSpec

TARGETS = ('submodel', 'full')
# Support threshold relative to max(1, ||beta||_inf)
SUPPORT_RTOL = 1e-9
# KKT tolerance relative to 1 + ||X^T Y||_inf
KKT_RTOL = 1e-8


@dataclass(frozen=True)
class SelectionRecord(object):
    """
    Everything inference needs to know about one lasso selection
    """
    # pylint: disable=too-many-instance-attributes
    data: Dataset
    lam: float
    omega: np.ndarray
    beta_lasso: np.ndarray
    active: np.ndarray
    signs: np.ndarray
    b: np.ndarray
    r: np.ndarray
    s: np.ndarray
    spec: RandomizationSpec
    sigma2: float
    target: str
    A: np.ndarray
    beta_hat: np.ndarray
    Sigma: np.ndarray
    holdout: np.ndarray = None

    @property
    def d(self):
        """Size of the active set"""
        return self.active.size

    @property
    def X_M(self):
        """Active columns of the design"""
        return self.data.X[:, self.active]

    @property
    def D(self):
        """Diagonal sign matrix"""
        return np.diag(self.signs)

    @property
    def Q1(self):
        """-X^T X_M"""
        return -(self.data.X.T @ self.X_M)

    @property
    def Q2(self):
        """X^T X_M D"""
        return (self.data.X.T @ self.X_M) * self.signs

    @property
    def omega_cov(self):
        """Covariance of the randomization"""
        return self.spec.covariance(self.data.X, self.sigma2)

    def reconstruct_omega(self):
        """Right-hand side of the KKT identity"""
        return self.Q1 @ self.beta_hat + self.Q2 @ self.b + self.r + self.s

    def holdout_data(self):
        """
        Hold-out rows restricted to the active columns

        :return: tuple (X2_M, Y2), or None without hold-out rows
        """
        if self.holdout is None or len(self.holdout) == 0:
            return None
        return self.data.X[np.ix_(self.holdout, self.active)], self.data.Y[self.holdout]


def target_matrix(X, active, target='submodel'):
    """
    Linear map A_M with beta_hat_M = A_M Y

    :param X: full design
    :param active: active column indices
    :param target: 'submodel' (pseudo-inverse of X_M) or 'full' (rows M of the pseudo-inverse of X)
    :raises RankDeficient: if the required design lacks full column rank
    """
    if target not in TARGETS:
        raise PyselinfConfigError("Unknown target convention '{}'".format(target))
    if target == 'full':
        if np.linalg.matrix_rank(X) < X.shape[1]:
            raise RankDeficient("Full-model target needs rank(X) = p")
        return np.linalg.solve(X.T @ X, X.T)[active]
    X_M = X[:, active]
    if np.linalg.matrix_rank(X_M) < len(active):
        raise RankDeficient("Active columns {} are linearly dependent".format(index_list_to_string(active)))
    return np.linalg.solve(X_M.T @ X_M, X_M.T)


def extract_kkt(data, lam, omega, beta_lasso, spec, target='submodel', holdout=None, sigma2=None):
    """
    Build a selection record from a randomized lasso solution

    :param data: full dataset the KKT identity refers to
    :param lam: penalty used by the solver
    :param omega: realised randomization
    :param beta_lasso: solver coefficients
    :param spec: :class:`pyselinf.selection.dataset.RandomizationSpec`
    :param target: 'submodel' or 'full'
    :param holdout: hold-out row indices, if any
    :param sigma2: noise variance, defaults to data.sigma2
    :rtype: :class:`SelectionRecord`
    :raises EmptyModel: if no coefficient is active
    :raises RankDeficient: if the active columns are dependent
    :raises NoConvergence: if the solution violates the KKT conditions
    """
    # pylint: disable=too-many-arguments, too-many-locals
    logger = getLogger(__name__)
    sigma2 = data.sigma2 if sigma2 is None else sigma2
    if sigma2 is None:
        raise PyselinfConfigError("Noise variance unknown; estimate it before extracting the selection")
    beta_lasso = np.asarray(beta_lasso, dtype=float)
    omega = np.asarray(omega, dtype=float)

    threshold = SUPPORT_RTOL * max(1.0, np.max(np.abs(beta_lasso)))
    active = np.flatnonzero(np.abs(beta_lasso) > threshold)
    if active.size == 0:
        raise EmptyModel("The lasso selected no variables at lambda = {:.6g}".format(lam))
    signs = np.sign(beta_lasso[active])
    A = target_matrix(data.X, active, target)
    beta_hat = A @ data.Y
    X_M = data.X[:, active]

    residual_full = data.X.T @ (data.X @ beta_lasso - data.Y)
    s_raw = omega - residual_full
    tolerance = KKT_RTOL * (1.0 + np.max(np.abs(data.X.T @ data.Y)))
    inactive = np.setdiff1d(np.arange(data.p), active)
    violation = np.max(np.abs(s_raw[active] - lam * signs))
    if inactive.size:
        violation = max(violation, np.max(np.abs(s_raw[inactive])) - lam)
    if violation > tolerance:
        msg = "Solution violates the KKT conditions by {:.3g} (tolerance {:.3g})".format(violation, tolerance)
        logger.error(msg)
        raise NoConvergence(msg)

    s = np.clip(s_raw, -lam, lam)
    s[active] = lam * signs
    r = data.X.T @ (X_M @ beta_hat - data.Y)
    record = SelectionRecord(data=data, lam=float(lam), omega=omega, beta_lasso=beta_lasso, active=active,
                             signs=signs, b=np.abs(beta_lasso[active]), r=r, s=s, spec=spec,
                             sigma2=float(sigma2), target=target, A=A, beta_hat=beta_hat,
                             Sigma=sigma2 * (A @ A.T),
                             holdout=None if holdout is None else np.asarray(holdout, dtype=int))
    logger.debug("Selected %s", index_list_to_string(active))
    return record
