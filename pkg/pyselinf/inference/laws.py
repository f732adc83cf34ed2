"""
Conditional laws of a selected linear contrast

For a contrast eta^T beta_M with estimate theta_hat = eta^T beta_hat_M, the
law of theta_hat given the selection and the nuisance statistic is a
Gaussian mixed over the orthant-truncated magnitudes b:

    b ~ N(mu_b, Sigma_b) restricted to b > 0
    theta_hat | b ~ N(mu_theta(b), var_theta)

with H = Q2^T Omega^-1 Q2, k = Q2^T Omega^-1 t, c = Sigma eta / nu,
nu = eta^T Sigma eta, c~ = D c and t = r + s + Q1 (beta_hat_M - c theta_hat).

When Omega is proportional to sigma^2 X^T X only the active block of t enters
and the algebra collapses; both routes are available and agree.
"""
from dataclasses import dataclass, replace
from logging import getLogger

import numpy as np

from ..pyselinf_errors import NotPositiveDefinite, SingularH, PyselinfConfigError, ShapeMismatch
from ..util.linalg import solve_pd, inv_pd, cholesky

PATHS = ('auto', 'generic', 'proportional')


@dataclass(frozen=True)
class SelectionGeometry(object):
    """
    Randomization terms shared by every contrast of a record

    :param H: Q2^T Omega^-1 Q2
    :param H_inv: inverse of H
    :param omega_inv_q2: Omega^-1 Q2, shape (p, d); k = omega_inv_q2^T t
    :param path: 'generic' or 'proportional'
    """
    H: np.ndarray
    H_inv: np.ndarray
    omega_inv_q2: np.ndarray
    path: str


def _resolve_path(record, path):
    if path not in PATHS:
        raise PyselinfConfigError("Unknown conditional law path '{}'".format(path))
    if path == 'auto':
        return 'proportional' if record.spec.is_proportional else 'generic'
    if path == 'proportional' and not record.spec.is_proportional:
        raise PyselinfConfigError("Proportional path needs Omega proportional to X^T X")
    return path


def selection_geometry(record, path='auto'):
    """
    H and Omega^-1 Q2 for a selection record

    :param record: :class:`pyselinf.selection.kkt.SelectionRecord`
    :param path: 'auto', 'generic' or 'proportional'
    :rtype: :class:`SelectionGeometry`
    :raises SingularH: if H is numerically singular
    """
    logger = getLogger(__name__)
    path = _resolve_path(record, path)
    if path == 'proportional':
        scale = record.spec.kappa / record.sigma2
        omega_inv_q2 = np.zeros((record.data.p, record.d))
        omega_inv_q2[record.active, np.arange(record.d)] = scale * record.signs
        X_M = record.X_M
        H = scale * (X_M.T @ X_M) * np.outer(record.signs, record.signs)
    else:
        omega_inv_q2 = solve_pd(record.omega_cov, record.Q2)
        H = record.Q2.T @ omega_inv_q2
    H = 0.5 * (H + H.T)
    try:
        cholesky(H)
    except NotPositiveDefinite as err:
        logger.error("Selection precision is singular: %s", err)
        raise SingularH("H is numerically singular: {}".format(err))
    return SelectionGeometry(H=H, H_inv=inv_pd(H), omega_inv_q2=omega_inv_q2, path=path)


@dataclass(frozen=True)
class ConditionalLaw(object):
    """
    Conditional law of theta_hat = eta^T beta_hat_M at parameter value theta
    """
    # pylint: disable=too-many-instance-attributes
    eta: np.ndarray
    theta: float
    theta_hat: float
    nu: float
    c: np.ndarray
    c_tilde: np.ndarray
    t: np.ndarray
    H: np.ndarray
    H_inv: np.ndarray
    k: np.ndarray
    var_theta: float
    Sigma_b: np.ndarray
    mu_b: np.ndarray
    Sigma: np.ndarray

    @property
    def d(self):
        """Dimension of b"""
        return self.k.size

    @property
    def sd_theta(self):
        """Conditional standard deviation of theta_hat given b"""
        return float(np.sqrt(self.var_theta))

    @property
    def tau(self):
        """sd_theta H c~, the direction of the reweighting"""
        return self.sd_theta * (self.H @ self.c_tilde)

    def delta(self, theta=None):
        """
        Offset of the reweighting exponent at theta

        :param theta: parameter value, default the law's theta
        """
        theta = self.theta if theta is None else theta
        return self.sd_theta * (theta / self.nu + self.c_tilde @ self.k - self.theta_hat / self.var_theta)

    def mu_theta(self, b):
        """
        Conditional mean of theta_hat given b

        :param b: vector or array of rows
        """
        return self.var_theta * (self.theta / self.nu + self.c_tilde @ self.k + np.asarray(b) @ (self.H @ self.c_tilde))

    def functional(self, x):
        """
        Coefficients (g1, g2) with g1^T b + g2 = (x - mu_theta(b)) / sd_theta

        :param x: evaluation point of the conditional CDF
        """
        sd = self.sd_theta
        g1 = -sd * (self.H @ self.c_tilde)
        g2 = x / sd - sd * (self.theta / self.nu + self.c_tilde @ self.k)
        return g1, float(g2)

    def at(self, theta):
        """Same contrast at another parameter value"""
        return replace(self, theta=float(theta), mu_b=self.mu_b + self.c_tilde * (theta - self.theta))


def conditional_law(record, eta, theta, path='auto', geometry=None):
    """
    Conditional law of eta^T beta_hat_M given selection at eta^T beta_M = theta

    :param record: :class:`pyselinf.selection.kkt.SelectionRecord`
    :param eta: contrast of length d, nonzero
    :param theta: parameter value
    :param path: 'auto', 'generic' or 'proportional'
    :param geometry: precomputed :class:`SelectionGeometry` for the same path
    :rtype: :class:`ConditionalLaw`
    :raises SingularH: if H is numerically singular
    """
    path = _resolve_path(record, path)
    eta = np.ravel(np.asarray(eta, dtype=float))
    if eta.size != record.d:
        raise ShapeMismatch("Contrast has length {}, expected d = {}".format(eta.size, record.d))
    if not np.any(eta):
        raise ValueError("Contrast must be nonzero")
    if geometry is None or geometry.path != path:
        geometry = selection_geometry(record, path)
    H = geometry.H
    H_inv = geometry.H_inv

    Sigma = record.Sigma
    nu = float(eta @ Sigma @ eta)
    c = Sigma @ eta / nu
    c_tilde = record.signs * c
    theta_hat = float(eta @ record.beta_hat)
    t = record.r + record.s + record.Q1 @ (record.beta_hat - c * theta_hat)
    Sigma_b = H_inv + nu * np.outer(c_tilde, c_tilde)

    if path == 'proportional':
        kappa = record.spec.kappa
        k = (kappa / record.sigma2) * record.signs * t[record.active]
        if record.target == 'submodel':
            var_theta = nu / (1.0 + kappa)
        else:
            var_theta = 1.0 / (1.0 / nu + c_tilde @ H @ c_tilde)
        mu_b = -H_inv @ k + c_tilde * theta
    else:
        k = geometry.omega_inv_q2.T @ t
        var_theta = 1.0 / (1.0 / nu + c_tilde @ H @ c_tilde)
        natural = -k + var_theta * (H @ c_tilde) * (theta / nu + c_tilde @ k)
        mu_b = Sigma_b @ natural
    return ConditionalLaw(eta=eta, theta=float(theta), theta_hat=theta_hat, nu=nu, c=c, c_tilde=c_tilde, t=t,
                          H=H, H_inv=H_inv, k=k, var_theta=float(var_theta), Sigma_b=0.5 * (Sigma_b + Sigma_b.T),
                          mu_b=mu_b, Sigma=Sigma)


@dataclass(frozen=True)
class ReferenceLaw(object):
    """
    Proposal N(mean, cov) restricted to the orthant, shared by every contrast

    :param mean: mu_bar
    :param cov: H^-1
    :param precision: H
    """
    mean: np.ndarray
    cov: np.ndarray
    precision: np.ndarray


def reference_law(record, path='auto', geometry=None):
    """
    Proposal law with precision H and H mu_bar = -Q2^T Omega^-1 (r + s - X^T X_M beta_hat_M)

    :param record: selection record
    :param path: 'auto', 'generic' or 'proportional'
    :param geometry: precomputed :class:`SelectionGeometry`
    :rtype: :class:`ReferenceLaw`
    """
    path = _resolve_path(record, path)
    if geometry is None or geometry.path != path:
        geometry = selection_geometry(record, path)
    offset = record.r + record.s + record.Q1 @ record.beta_hat
    mean = -geometry.H_inv @ (geometry.omega_inv_q2.T @ offset)
    return ReferenceLaw(mean=mean, cov=geometry.H_inv, precision=geometry.H)


def log_importance_weight(b, tau, delta):
    """
    Log of exp((b^T tau)^2 / 2 + delta b^T tau) on the orthant, -inf outside

    :param b: vector or array of rows
    :param tau: direction
    :param delta: offset
    """
    b = np.asarray(b, dtype=float)
    proj = b @ np.asarray(tau, dtype=float)
    inside = np.all(b > 0.0, axis=-1)
    return np.where(inside, 0.5 * proj * proj + delta * proj, -np.inf)


def importance_weight(b, tau, delta):
    """
    Ratio, up to a constant, of the conditional law density to the reference density

    :param b: vector or array of rows on the orthant
    :param tau: sd_theta H c~
    :param delta: offset from :meth:`ConditionalLaw.delta`
    """
    return np.exp(log_importance_weight(b, tau, delta))
