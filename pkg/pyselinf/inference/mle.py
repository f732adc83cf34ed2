"""
Selective maximum likelihood

The selection-adjusted negative log-likelihood of beta_M is

    1/2 (beta_hat - beta)^T Sigma^-1 (beta_hat - beta) + log P(N(mu_b(beta), Sigma_b) > 0)

with Sigma_b = H^-1 + D Sigma D and mu_b(beta) = D beta - H^-1 Q2^T Omega^-1 (r + s).
Gradient and curvature of the log orthant probability come from the
truncated moments of b, estimated with SOV samples under common random
numbers so the objective is a fixed function within an optimisation run.
"""
from dataclasses import dataclass, field
from logging import getLogger

import numpy as np
from scipy.special import logsumexp

from ..pyselinf_errors import HessianNotPD, NoConvergence, NotPositiveDefinite, PyselinfConfigError
from ..qmc.batchfactory import replicate_set, child_seeds
from ..sov.orthant import gibson_reorder, sov_transform
from ..sov.estimators import weighted_moments
from ..util.linalg import cholesky, inv_pd, solve_pd
from ..util.print_helpers import vector_to_string
from ..util.special import norm_sf, norm_inv_cdf
from .laws import selection_geometry
from .report import InferenceReport, ReportEntry

CENTERS = ('mle', 'observed')


@dataclass(frozen=True)
class MleOptions(object):
    """
    Optimiser settings

    Steps follow the Newton direction -H^-1 g of the sampled gradient g and
    information H.  A full step (step = 1) is tried first instead of a small
    fixed step, and backtracking halves it until the Sigma-norm of the
    gradient decreases by the Armijo fraction.  Convergence requires that
    norm to reach gtol.

    :param step: initial trial step on the Newton direction
    :param n: RQMC points per replicate during the descent
    :param replicates: replicate batches during the descent
    :param max_iter: iteration cap
    :param gtol: Sigma-norm of the gradient at convergence
    :param refine_threshold: gradient norm below which the sample is enlarged once, 0 disables
    :param refine_n: points per replicate after enlargement
    :param hessian_n: points per replicate for the final curvature
    :param armijo: sufficient decrease constant of the gradient norm
    :param min_step: smallest trial step, the run fails when it is reached
    :param center: 'mle' or 'observed', centre of the Wald intervals
    :param seed: master seed of the point sets
    """
    # pylint: disable=too-many-instance-attributes
    step: float = 1.0
    n: int = 256
    replicates: int = 1
    max_iter: int = 5000
    gtol: float = 1e-6
    refine_threshold: float = 1e-3
    refine_n: int = 1024
    hessian_n: int = 4096
    armijo: float = 1e-4
    min_step: float = 1e-10
    center: str = 'mle'
    seed: int = 0

    def __post_init__(self):
        if self.center not in CENTERS:
            raise PyselinfConfigError("Wald centre must be one of {}, got '{}'".format(CENTERS, self.center))
        if not self.step > 0 or self.max_iter < 1:
            raise PyselinfConfigError("Step must be positive and the iteration cap at least 1")
        if not 0 < self.min_step < self.step:
            raise PyselinfConfigError("Minimum step {} must lie in (0, step = {})".format(self.min_step, self.step))
        if not self.gtol > 0:
            raise PyselinfConfigError("Gradient tolerance must be positive, got {}".format(self.gtol))


@dataclass(frozen=True)
class LikelihoodEvaluation(object):
    """
    Objective, gradient and curvature at one point under fixed points
    """
    beta: np.ndarray
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    log_orthant: float


@dataclass
class MleResult(object):
    """
    Selective MLE with Wald intervals
    """
    # pylint: disable=too-many-instance-attributes
    estimate: np.ndarray
    observed_info: np.ndarray
    cov: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    pvalues: np.ndarray
    alpha: float
    iterations: int
    grad_norm: float
    converged: bool
    objective: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    min_eigenvalues: list = field(default_factory=list)

    @property
    def stderr(self):
        """Wald standard errors"""
        return np.sqrt(np.diag(self.cov))

    def to_report(self, active):
        """
        Report with one entry per selected variable

        :param active: design columns of the selected variables
        """
        entries = [ReportEntry(index=int(col), estimate=float(self.estimate[j]), pvalue=float(self.pvalues[j]),
                               lower=float(self.lower[j]), upper=float(self.upper[j]))
                   for j, col in enumerate(active)]
        return InferenceReport(method='mle-sov', alpha=self.alpha, entries=entries)


class SelectiveLikelihood(object):
    """
    Selection-adjusted Gaussian likelihood of the selected coefficients

    :param beta_hat: observed estimate beta_hat_M
    :param Sigma: covariance of beta_hat_M
    :param signs: signs of the active lasso coefficients
    :param Sigma_b: covariance of the magnitudes, H^-1 + D Sigma D
    :param offset: mu_b(beta) - D beta
    """

    def __init__(self, beta_hat, Sigma, signs, Sigma_b, offset):
        # pylint: disable=too-many-arguments
        self.logger = getLogger(__name__)
        self.beta_hat = np.asarray(beta_hat, dtype=float)
        self.signs = np.asarray(signs, dtype=float)
        self.offset = np.asarray(offset, dtype=float)
        self.Sigma = np.asarray(Sigma, dtype=float)
        self.Sigma_b = np.asarray(Sigma_b, dtype=float)
        self.Sigma_inv = inv_pd(self.Sigma)
        self.Sigma_b_inv = inv_pd(self.Sigma_b)
        self.og = gibson_reorder(self.mu_b(self.beta_hat), self.Sigma_b)

    @classmethod
    def from_record(cls, record):
        """
        Build from a selection record

        :param record: :class:`pyselinf.selection.kkt.SelectionRecord`
        """
        geometry = selection_geometry(record)
        DSD = record.Sigma * np.outer(record.signs, record.signs)
        Sigma_b = geometry.H_inv + DSD
        offset = -geometry.H_inv @ (geometry.omega_inv_q2.T @ (record.r + record.s))
        return cls(record.beta_hat, record.Sigma, record.signs, 0.5 * (Sigma_b + Sigma_b.T), offset)

    @property
    def d(self):
        """Number of coefficients"""
        return self.beta_hat.size

    def mu_b(self, beta):
        """Mean of the magnitudes at beta"""
        return self.signs * np.asarray(beta, dtype=float) + self.offset

    def evaluate(self, beta, reps):
        """
        Objective, gradient and curvature at beta under the given points

        :param beta: coefficients
        :param reps: replicate set of dimension d
        :rtype: :class:`LikelihoodEvaluation`
        """
        beta = np.asarray(beta, dtype=float)
        mu = self.mu_b(beta)
        og = self.og.with_mean(mu)
        logs = []
        means = []
        covs = []
        for batch in reps:
            sb = sov_transform(og, batch)
            lw = sb.log_weight
            logs.append(logsumexp(lw) - np.log(lw.size))
            mean, cov = weighted_moments(sb.b, lw)
            means.append(mean)
            covs.append(cov)
        log_orthant = float(logsumexp(logs) - np.log(len(logs)))
        mean = np.mean(means, axis=0)
        cov = np.mean(covs, axis=0)
        gap = self.beta_hat - beta
        value = 0.5 * gap @ self.Sigma_inv @ gap + log_orthant
        gradient = -self.Sigma_inv @ gap + self.signs * (self.Sigma_b_inv @ (mean - mu))
        curvature = self.Sigma_b_inv @ cov @ self.Sigma_b_inv - self.Sigma_b_inv
        hessian = self.Sigma_inv + curvature * np.outer(self.signs, self.signs)
        return LikelihoodEvaluation(beta=beta, value=float(value), gradient=gradient,
                                    hessian=0.5 * (hessian + hessian.T), log_orthant=log_orthant)

    def gradient_norm(self, gradient):
        """Sigma-norm sqrt(g^T Sigma g) of a gradient"""
        return float(np.sqrt(max(gradient @ self.Sigma @ gradient, 0.0)))

    def minimize(self, options=None, alpha=0.05):
        """
        Damped Newton iteration on the SOV gradient

        The iteration solves gradient = 0 for the estimated gradient.  Each
        step is -H^-1 g with H the observed selective information, halved
        until the Sigma-norm of the gradient falls by the Armijo fraction.
        The run converges only once that norm is at most ``gtol``.

        :param options: :class:`MleOptions`
        :param alpha: level of the Wald intervals
        :rtype: :class:`MleResult`
        :raises NoConvergence: if the iteration cap is reached or no step reduces the gradient
        :raises HessianNotPD: if the final observed information is not positive-definite
        """
        # pylint: disable=too-many-locals
        options = MleOptions() if options is None else options
        descent_seed, refine_seed, hessian_seed = child_seeds(options.seed, 3)
        reps = replicate_set(self.d, options.n, options.replicates, descent_seed)
        refined = options.refine_threshold <= 0 or options.refine_n <= options.n

        current = self.evaluate(self.beta_hat, reps)
        grad_norm = self.gradient_norm(current.gradient)
        objective = [current.value]
        grad_norms = [grad_norm]
        min_eigenvalues = [float(np.linalg.eigvalsh(current.hessian)[0])]
        converged = False
        iteration = 0
        for iteration in range(1, options.max_iter + 1):
            if grad_norm <= options.gtol:
                converged = True
                break
            if not refined and grad_norm < options.refine_threshold:
                self.logger.debug("Enlarging descent sample to %d points at iteration %d", options.refine_n, iteration)
                reps = replicate_set(self.d, options.refine_n, options.replicates, refine_seed)
                current = self.evaluate(current.beta, reps)
                grad_norm = self.gradient_norm(current.gradient)
                refined = True
                continue
            direction = self._newton_direction(current)
            step = options.step
            candidate = None
            while step >= options.min_step:
                trial = self.evaluate(current.beta + step * direction, reps)
                trial_norm = self.gradient_norm(trial.gradient)
                if trial_norm <= (1.0 - options.armijo * step) * grad_norm:
                    candidate = trial
                    break
                step *= 0.5
            if candidate is None:
                msg = "Selective MLE stalled at iteration {} (gradient norm {:.3g} above {:.3g})".format(
                    iteration, grad_norm, options.gtol)
                self.logger.error(msg)
                raise NoConvergence(msg)
            current = candidate
            grad_norm = trial_norm
            objective.append(current.value)
            grad_norms.append(grad_norm)
            min_eigenvalues.append(float(np.linalg.eigvalsh(current.hessian)[0]))

        if not converged:
            msg = "Selective MLE did not converge in {} iterations (gradient norm {:.3g})".format(
                options.max_iter, grad_norm)
            self.logger.error(msg)
            raise NoConvergence(msg)
        self.logger.debug("Selective MLE %s after %d iterations", vector_to_string(current.beta), iteration)

        final = self.evaluate(current.beta, replicate_set(self.d, options.hessian_n, options.replicates,
                                                          hessian_seed))
        try:
            cholesky(final.hessian)
        except NotPositiveDefinite as err:
            self.logger.error("Observed selective information is not positive-definite")
            raise HessianNotPD("Observed selective information is not positive-definite: {}".format(err))
        cov = inv_pd(final.hessian)
        stderr = np.sqrt(np.diag(cov))
        centre = current.beta if options.center == 'mle' else self.beta_hat
        quantile = norm_inv_cdf(1.0 - alpha / 2.0) if alpha < 1.0 else 0.0
        pvalues = np.clip(2.0 * norm_sf(np.abs(current.beta) / stderr), 0.0, 1.0)
        return MleResult(estimate=current.beta, observed_info=final.hessian, cov=cov,
                         lower=centre - quantile * stderr, upper=centre + quantile * stderr,
                         pvalues=pvalues, alpha=alpha, iterations=iteration, grad_norm=grad_norm,
                         converged=converged, objective=objective, grad_norms=grad_norms,
                         min_eigenvalues=min_eigenvalues)

    def _newton_direction(self, evaluation):
        # Sigma g is the fallback when the sampled information loses definiteness
        try:
            return -solve_pd(evaluation.hessian, evaluation.gradient)
        except NotPositiveDefinite:
            self.logger.warning("Sampled information not positive-definite, using the unadjusted direction")
            return -self.Sigma @ evaluation.gradient


def selective_mle(record, options=None, alpha=0.05):
    """
    Selective MLE and Wald intervals for the selected coefficients

    :param record: :class:`pyselinf.selection.kkt.SelectionRecord`
    :param options: :class:`MleOptions`
    :param alpha: level of the Wald intervals
    :rtype: :class:`MleResult`
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("Level must lie in (0, 1], got {}".format(alpha))
    return SelectiveLikelihood.from_record(record).minimize(options, alpha)
