"""
Hit-and-run sampling of orthant-truncated Gaussians

The chain starts at the mode of the truncated law.  Each move picks a
direction uniformly from the coordinate axes and the leading principal
components, and draws the next state exactly from the Gaussian restricted to
the feasible segment of that line.
"""
from dataclasses import dataclass
from logging import getLogger

import numpy as np
from scipy import linalg, optimize
from scipy.special import ndtri

from ..pyselinf_errors import NoConvergence, PyselinfConfigError
from ..inference.intervals import GridConfig, grid_anchor, holdout_estimate, invert_pvalue_curve, two_sided
from ..inference.laws import conditional_law, selection_geometry
from ..inference.report import InferenceReport, ReportEntry
from ..sov.orthant import OrthantGaussian
from ..util.linalg import inv_pd
from ..util.special import norm_cdf, norm_sf
from ..util.print_helpers import vector_to_string
from .samplerbase import TruncatedGaussianSampler

# Share of the total variance the principal directions must exceed
PC_VARIANCE_SHARE = 0.5


@dataclass(frozen=True)
class HitAndRunConfig(object):
    """
    :param n: retained states
    :param burn_in: discarded initial states
    :param seed: chain seed
    :param use_pcs: add the leading principal components to the coordinate directions
    """
    n: int
    burn_in: int = 20
    seed: int = 0
    use_pcs: bool = True

    def __post_init__(self):
        if self.n < 1 or self.burn_in < 0:
            raise PyselinfConfigError("Hit-and-run needs n >= 1 and burn_in >= 0")


def find_mode(og):
    """
    Mode of the truncated Gaussian, argmin over b >= 0 of (b - mu)^T Sigma^-1 (b - mu)

    Solved as non-negative least squares in the whitened coordinates.

    :param og: :class:`pyselinf.sov.orthant.OrthantGaussian`
    :return: mode in the original order
    :raises NoConvergence: if the active-set solver hits its cap
    """
    logger = getLogger(__name__)
    factor = linalg.cholesky(og.cov, lower=True)
    whitening = linalg.solve_triangular(factor, np.eye(og.d), lower=True)
    try:
        mode, _ = optimize.nnls(whitening, whitening @ og.mean)
    except RuntimeError as err:
        logger.error("Mode search failed: %s", err)
        raise NoConvergence("Mode search failed: {}".format(err))
    return mode


def pc_directions(Sigma):
    """
    Leading principal directions explaining more than half of the variance

    :param Sigma: positive-definite covariance
    :return: array of shape (k, d), unit-norm rows in decreasing eigenvalue order
    """
    values, vectors = np.linalg.eigh(np.asarray(Sigma, dtype=float))
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = vectors[:, order]
    share = np.cumsum(values) / values.sum()
    count = int(np.argmax(share > PC_VARIANCE_SHARE)) + 1
    return vectors[:, :count].T


def truncated_standard_normal(u, lower, upper):
    """
    Inverse-CDF draw of a standard normal restricted to [lower, upper]

    :param u: uniform value in (0, 1)
    :param lower: lower limit (may be -inf)
    :param upper: upper limit (may be inf)
    """
    if lower > 0.0:
        sf_lower = norm_sf(lower)
        mass = sf_lower - norm_sf(upper)
        if mass <= 0.0:
            return lower
        value = -ndtri(sf_lower - u * mass)
    else:
        cdf_lower = norm_cdf(lower)
        mass = norm_cdf(upper) - cdf_lower
        if mass <= 0.0:
            return upper
        value = ndtri(cdf_lower + u * mass)
    return float(np.clip(value, lower, upper))


def chain_directions(og, cfg):
    """
    Coordinate axes, followed by the leading principal components when configured

    :param og: orthant Gaussian
    :param cfg: :class:`HitAndRunConfig`
    """
    directions = np.eye(og.d)
    if cfg.use_pcs:
        directions = np.vstack([directions, pc_directions(og.cov)])
    return directions


def hit_and_run_sample(og, cfg, start=None, directions=None):
    """
    Hit-and-run chain on the orthant

    :param og: orthant Gaussian
    :param cfg: :class:`HitAndRunConfig`
    :param start: initial state, default the mode
    :param directions: direction set, default :func:`chain_directions`
    :return: retained states, array of shape (n, d)
    """
    # pylint: disable=too-many-locals
    logger = getLogger(__name__)
    rng = np.random.default_rng(cfg.seed)
    precision = inv_pd(og.cov)
    if directions is None:
        directions = chain_directions(og, cfg)
    if start is None:
        start = find_mode(og)
    pushed = directions @ precision
    curvature = np.sum(directions * pushed, axis=1)

    tiny = np.finfo(float).tiny
    state = np.maximum(start, 1e-10 * np.sqrt(np.diag(og.cov)))
    logger.debug("Hit-and-run start %s", vector_to_string(state))
    retained = np.empty((cfg.n, og.d))
    picks = rng.integers(directions.shape[0], size=cfg.n + cfg.burn_in)
    uniforms = rng.random(cfg.n + cfg.burn_in)
    for step, (pick, u) in enumerate(zip(picks, uniforms)):
        v = directions[pick]
        centre = -(pushed[pick] @ (state - og.mean)) / curvature[pick]
        sd = 1.0 / np.sqrt(curvature[pick])
        moving = np.abs(v) > 1e-15
        with np.errstate(divide='ignore'):
            limits = -state[moving] / v[moving]
        rising = v[moving] > 0.0
        lower = np.max(limits[rising], initial=-np.inf)
        upper = np.min(limits[~rising], initial=np.inf)
        t = centre + sd * truncated_standard_normal(u, (lower - centre) / sd, (upper - centre) / sd)
        state = np.maximum(state + t * v, tiny)
        if step >= cfg.burn_in:
            retained[step - cfg.burn_in] = state
    return retained


class HitAndRunSampler(TruncatedGaussianSampler):
    """
    Unweighted hit-and-run draws

    :param cfg: :class:`HitAndRunConfig`
    """

    def __init__(self, cfg):
        super(HitAndRunSampler, self).__init__()
        self.cfg = cfg
        self.prepared = None

    def prepare(self, og):
        """
        Find the mode and the direction set of og ahead of drawing

        :param og: orthant Gaussian
        """
        self.prepared = (og, find_mode(og), chain_directions(og, self.cfg))

    def draw(self, og):
        """
        :param og: orthant Gaussian
        :return: tuple (states of shape (n, d), unit weights)
        """
        start = directions = None
        if self.prepared is not None and self.prepared[0] is og:
            _, start, directions = self.prepared
        else:
            self.logger.debug("Drawing without a prepared mode")
        samples = hit_and_run_sample(og, self.cfg, start, directions)
        return samples, np.ones(samples.shape[0])


def chain_pivot(samples, law, thetas, anchor):
    """
    p(theta) from a chain drawn at theta = anchor, reweighted to each theta

    :param samples: states of the chain targeting the law at the anchor
    :param law: conditional law of the contrast
    :param thetas: array of parameter values
    :param anchor: parameter value the chain targets
    :return: tuple (p, ess)
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    proj = samples @ law.tau
    delta = law.delta(thetas)
    log_w = (delta - law.delta(anchor))[:, None] * proj[None, :]
    log_w -= np.max(log_w, axis=1, keepdims=True)
    w = np.exp(log_w)
    total = w.sum(axis=1)
    p = (w * norm_cdf(-(proj[None, :] + delta[:, None]))).sum(axis=1) / total
    return np.clip(p, 0.0, 1.0), total ** 2 / np.sum(w * w, axis=1)


def hit_and_run_pvalue(record, eta, theta, cfg, anchor=None):
    """
    Conditional CDF pivot F(theta_hat; theta) from a hit-and-run chain

    :param record: selection record
    :param eta: contrast
    :param theta: hypothesised value
    :param cfg: :class:`HitAndRunConfig`
    :param anchor: parameter value the chain targets, default the hold-out estimate of the contrast
    :rtype: float
    """
    if anchor is None:
        fit = holdout_estimate(record)
        anchor = float(np.dot(eta, record.beta_hat if fit is None else fit[0]))
    law = conditional_law(record, eta, anchor)
    samples = hit_and_run_sample(OrthantGaussian.natural(law.mu_b, law.Sigma_b), cfg)
    return float(chain_pivot(samples, law, [theta], anchor)[0][0])


def hit_and_run_intervals(record, alpha, cfg, grid_config=None):
    """
    Confidence intervals from one chain per coordinate, anchored at the hold-out estimate

    :param record: selection record
    :param alpha: level
    :param cfg: :class:`HitAndRunConfig`
    :param grid_config: :class:`pyselinf.inference.intervals.GridConfig`
    :rtype: :class:`pyselinf.inference.report.InferenceReport`
    """
    logger = getLogger(__name__)
    grid_config = GridConfig() if grid_config is None else grid_config
    geometry = selection_geometry(record)
    entries = []
    for j in range(record.d):
        eta = np.zeros(record.d)
        eta[j] = 1.0
        anchor, scale = grid_anchor(record, j)
        law = conditional_law(record, eta, anchor, geometry=geometry)
        samples = hit_and_run_sample(OrthantGaussian.natural(law.mu_b, law.Sigma_b), cfg)

        def curve(thetas, samples=samples, law=law, anchor=anchor):
            return chain_pivot(samples, law, thetas, anchor)

        lower, upper, flags, kept = invert_pvalue_curve(grid_config.grid(anchor, scale), curve, alpha,
                                                        grid_config.refine_tol * scale)
        null_p, _ = curve(np.array([0.0]))
        min_ess = float(curve(np.concatenate([kept, [0.0]]))[1].min())
        if min_ess < grid_config.ess_floor:
            logger.warning("Effective sample size %.1f below %s for variable %d", min_ess, grid_config.ess_floor,
                           record.active[j])
            flags.append('ess-collapse')
        entries.append(ReportEntry(index=int(record.active[j]), estimate=float(record.beta_hat[j]),
                                   pvalue=float(two_sided(null_p)[0]), lower=lower, upper=upper,
                                   min_ess=min_ess, flags=';'.join(flags)))
    return InferenceReport(method='hit-and-run', alpha=alpha, entries=entries)
