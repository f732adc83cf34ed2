"""
Confidence intervals from one weighted batch

Samples are drawn once from the reference law N(mu_bar, H^-1) restricted to
the orthant.  For every selected coordinate and every theta on a grid the
samples are reweighted to the conditional law at theta, which gives the
pivot p(theta) = F(theta_hat; theta) without redrawing.  The interval
collects the theta values with 2 min(p, 1 - p) >= alpha.

The last variable of the sequential transform is integrated out in closed
form under the reweighting: along z_d the weight is a Gaussian tilt with
precision 1 - alpha_d^2, where alpha_d is the z_d coefficient of b^T tau.
"""
from dataclasses import dataclass
from logging import getLogger

import numpy as np

from ..pyselinf_errors import EffectiveSampleCollapse
from ..sov.orthant import gibson_reorder, sov_transform
from ..sov.estimators import replicate_summary, replicate_batches
from ..util.special import norm_cdf, log_norm_sf, preintegrate_last
from .laws import conditional_law, reference_law, selection_geometry
from .report import InferenceReport, ReportEntry

# Standardised truncation point above which the tilted last variable is
# integrated by Gauss-Laguerre quadrature
TAIL_SWITCH = 6.0
LAGUERRE_NODES, LAGUERRE_WEIGHTS = np.polynomial.laguerre.laggauss(40)
# Largest squared tilt coefficient kept away from one
TILT_CEILING = 1.0 - 1e-12
# Tolerated increase of p(theta) along the grid before flagging
MONOTONE_TOL = 1e-8


@dataclass(frozen=True)
class GridConfig(object):
    """
    Grid used to invert the pivot

    :param points: number of equispaced grid points
    :param width: half-width of the grid in units of the anchor's standard error
    :param refine_tol: bisection tolerance in units of the anchor's standard error
    :param ess_floor: effective sample size below which a coordinate is flagged
    :param strict: raise instead of flagging when the effective sample size collapses
    """
    points: int = 200
    width: float = 10.0
    refine_tol: float = 1e-3
    ess_floor: float = 32.0
    strict: bool = False

    def __post_init__(self):
        if self.points < 2 or not self.width > 0 or not self.refine_tol > 0:
            raise ValueError("Grid needs at least 2 points and positive width and tolerance")

    def grid(self, anchor, scale):
        """Equispaced grid around an anchor"""
        return np.linspace(anchor - self.width * scale, anchor + self.width * scale, self.points)


def holdout_estimate(record):
    """
    Least-squares fit of the submodel on the hold-out rows

    :param record: selection record
    :return: tuple (coefficients, covariance), or None when the hold-out rows do not identify the submodel
    """
    holdout = record.holdout_data()
    if holdout is None:
        return None
    X2, Y2 = holdout
    if X2.shape[0] <= record.d or np.linalg.matrix_rank(X2) < record.d:
        return None
    gram_inv = np.linalg.inv(X2.T @ X2)
    return gram_inv @ (X2.T @ Y2), record.sigma2 * gram_inv


def grid_anchor(record, j):
    """
    Centre and scale of the grid for coordinate j

    The hold-out estimate and its standard error when available, else
    beta_hat_M and sqrt(Sigma_jj).

    :param record: selection record
    :param j: position within the active set
    :return: tuple (anchor, scale)
    """
    fit = holdout_estimate(record)
    if fit is not None:
        coef, cov = fit
        return float(coef[j]), float(np.sqrt(cov[j, j]))
    return float(record.beta_hat[j]), float(np.sqrt(record.Sigma[j, j]))


def truncated_tail_expectation(slope, intercept, h):
    """
    E[Phi(slope x + intercept) | x >= h] for a standard normal x far in the tail

    Writing x = h + t / h, t has density proportional to exp(-t - t^2 / (2 h^2))
    on t >= 0, which Gauss-Laguerre quadrature integrates without forming the
    vanishing tail mass.

    :param slope: scalar slope
    :param intercept: array of intercepts
    :param h: array of truncation points, positive, same shape as intercept
    """
    h = np.asarray(h, dtype=float)[..., None]
    damp = LAGUERRE_WEIGHTS * np.exp(-0.5 * (LAGUERRE_NODES / h) ** 2)
    values = norm_cdf(slope * (h + LAGUERRE_NODES / h) + np.asarray(intercept, dtype=float)[..., None])
    return (damp * values).sum(axis=-1) / damp.sum(axis=-1)


class WeightedPivotCurve(object):
    """
    p(theta) for one contrast from one reference batch

    :param sov_batch: :class:`pyselinf.sov.orthant.SovBatch` of the reference law
    :param law: conditional law of the contrast at any theta
    :param preintegrate: integrate the last variable out under the tilt
    """

    def __init__(self, sov_batch, law, preintegrate=True):
        self.logger = getLogger(__name__)
        og = sov_batch.og
        self.law = law
        self.preintegrate = preintegrate
        tau = law.tau
        self.proj = sov_batch.b @ tau
        self.log_weight = sov_batch.log_weight
        last = og.perm[-1]
        self.tilt = float(og.chol[-1, -1] * tau[last])
        if self.tilt ** 2 > TILT_CEILING:
            self.logger.debug("Tilt coefficient %.6g clipped", self.tilt)
            self.tilt = float(np.sign(self.tilt) * np.sqrt(TILT_CEILING))
        self.rest = self.proj - self.tilt * sov_batch.z[:, -1]
        self.lower = sov_batch.lower[:, -1]
        self.log_prefix = sov_batch.log_prefix_weight

    def _plain(self, delta):
        log_w = self.log_weight[None, :] + 0.5 * self.proj ** 2 + delta[:, None] * self.proj
        ratio = norm_cdf(-(self.proj[None, :] + delta[:, None]))
        return log_w, ratio

    def _preintegrated(self, delta):
        a = self.tilt
        s2 = 1.0 / (1.0 - a * a)
        s = np.sqrt(s2)
        shift = self.rest[None, :] + delta[:, None]
        m = s2 * a * shift
        h = (self.lower[None, :] - m) / s
        log_tail = log_norm_sf(h)
        log_w = (self.log_prefix[None, :] + 0.5 * self.rest ** 2 + delta[:, None] * self.rest
                 + 0.5 * s2 * a * a * shift ** 2 + np.log(s) + log_tail)
        slope = -a * s
        intercept = -a * m - shift
        far = h > TAIL_SWITCH
        h_near = np.where(far, 0.0, h)
        with np.errstate(divide='ignore', invalid='ignore'):
            near = preintegrate_last(slope, intercept, h_near) / np.exp(log_tail)
        ratio = np.where(far, 0.0, near)
        if np.any(far):
            ratio[far] = truncated_tail_expectation(slope, intercept[far], h[far])
        return log_w, np.clip(np.nan_to_num(ratio, nan=0.0), 0.0, 1.0)

    def evaluate(self, thetas):
        """
        Pivot values and effective sample sizes on an array of theta values

        :param thetas: array of parameter values
        :return: tuple (p, ess), arrays of the same length as thetas
        """
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        delta = self.law.delta(thetas)
        if self.preintegrate:
            log_w, ratio = self._preintegrated(delta)
        else:
            log_w, ratio = self._plain(delta)
        log_w = log_w - np.max(log_w, axis=1, keepdims=True)
        w = np.exp(log_w)
        total = w.sum(axis=1)
        p = np.clip((w * ratio).sum(axis=1) / total, 0.0, 1.0)
        ess = total ** 2 / np.sum(w * w, axis=1)
        return p, ess


class ReplicatedPivotCurve(object):
    """
    Replicate-averaged p(theta) over several reference batches

    :param curves: list of :class:`WeightedPivotCurve`
    """

    def __init__(self, curves):
        self.curves = list(curves)

    def replicates(self, thetas):
        """
        Per-replicate pivots and effective sample sizes

        :return: tuple of arrays of shape (R, len(thetas))
        """
        values = [curve.evaluate(thetas) for curve in self.curves]
        return np.array([v[0] for v in values]), np.array([v[1] for v in values])

    def __call__(self, thetas):
        p, ess = self.replicates(thetas)
        return p.mean(axis=0), ess.min(axis=0)


def two_sided(p):
    """2 min(p, 1 - p)"""
    p = np.asarray(p, dtype=float)
    return 2.0 * np.minimum(p, 1.0 - p)


def invert_pvalue_curve(grid, curve, alpha, tol):
    """
    Tightest interval holding every grid theta with 2 min(p, 1 - p) >= alpha

    Each boundary is refined by bisection between the last rejected and the
    first accepted grid point.

    :param grid: increasing theta values
    :param curve: callable mapping a theta array to (p, ess) arrays
    :param alpha: level
    :param tol: bisection width
    :return: tuple (lower, upper, flags, accepted thetas including the refined limits)
    """
    logger = getLogger(__name__)
    flags = []
    p, _ = curve(grid)
    if np.any(np.diff(p) > MONOTONE_TOL):
        logger.warning("Pivot not monotone along the grid")
        flags.append('non-monotone')
    accepted = np.flatnonzero(two_sided(p) >= alpha)
    if accepted.size == 0:
        return float('nan'), float('nan'), flags + ['empty'], np.array([])

    def refine(rejected, inside):
        while abs(inside - rejected) > tol:
            middle = 0.5 * (rejected + inside)
            if two_sided(curve(np.array([middle]))[0])[0] >= alpha:
                inside = middle
            else:
                rejected = middle
        return inside

    first = accepted[0]
    last = accepted[-1]
    if first == 0:
        lower = float(grid[0])
        flags.append('grid-bound')
    else:
        lower = refine(grid[first - 1], grid[first])
    if last == grid.size - 1:
        upper = float(grid[-1])
        if 'grid-bound' not in flags:
            flags.append('grid-bound')
    else:
        upper = refine(grid[last + 1], grid[last])
    kept = np.concatenate([[lower], grid[accepted], [upper]])
    return float(lower), float(upper), flags, kept


def confidence_intervals(record, alpha, reps, grid_config=None, preintegrate=True):
    """
    Selective confidence intervals and null p-values for every selected coefficient

    One reference batch per replicate is reused for every coordinate and
    every grid value.  The reported p-value is the two-sided pivot at zero.

    :param record: :class:`pyselinf.selection.kkt.SelectionRecord`
    :param alpha: level, in (0, 1]
    :param reps: replicate set of dimension >= d
    :param grid_config: :class:`GridConfig`
    :param preintegrate: integrate the last variable out under the tilt
    :rtype: :class:`pyselinf.inference.report.InferenceReport`
    :raises EffectiveSampleCollapse: only with a strict grid configuration
    """
    # pylint: disable=too-many-locals
    logger = getLogger(__name__)
    if not 0.0 < alpha <= 1.0:
        raise ValueError("Level must lie in (0, 1], got {}".format(alpha))
    grid_config = GridConfig() if grid_config is None else grid_config
    geometry = selection_geometry(record)
    reference = reference_law(record, geometry=geometry)
    og = gibson_reorder(reference.mean, reference.cov)
    batches = [sov_transform(og, batch) for batch in replicate_batches(reps)]

    entries = []
    for j in range(record.d):
        eta = np.zeros(record.d)
        eta[j] = 1.0
        law = conditional_law(record, eta, record.beta_hat[j], geometry=geometry)
        curve = ReplicatedPivotCurve(WeightedPivotCurve(sb, law, preintegrate) for sb in batches)
        anchor, scale = grid_anchor(record, j)
        grid = grid_config.grid(anchor, scale)
        lower, upper, flags, kept = invert_pvalue_curve(grid, curve, alpha, grid_config.refine_tol * scale)

        null_p, _ = curve.replicates(np.array([0.0]))
        null = replicate_summary(two_sided(null_p[:, 0]), require_stderr=False)
        checked = np.concatenate([kept, [0.0]])
        min_ess = float(curve(checked)[1].min())
        if min_ess < grid_config.ess_floor:
            msg = "Effective sample size {:.1f} below {} for variable {}".format(min_ess, grid_config.ess_floor,
                                                                                 record.active[j])
            if grid_config.strict:
                logger.error(msg)
                raise EffectiveSampleCollapse(msg)
            logger.warning(msg)
            flags.append('ess-collapse')

        boundary_stderr = float('nan')
        if len(batches) > 1 and 'empty' not in flags:
            limits, _ = curve.replicates(np.array([lower, upper]))
            boundary_stderr = float(np.max(limits.std(axis=0, ddof=1)) / np.sqrt(len(batches)))
        entries.append(ReportEntry(index=int(record.active[j]), estimate=float(record.beta_hat[j]),
                                   pvalue=float(np.clip(null.value, 0.0, 1.0)), lower=lower, upper=upper,
                                   pvalue_stderr=null.stderr, boundary_stderr=boundary_stderr,
                                   min_ess=min_ess, flags=';'.join(flags)))
        logger.debug("Variable %d: [%.6g, %.6g] p=%.4g", record.active[j], lower, upper, null.value)
    return InferenceReport(method='cdf-sov', alpha=alpha, entries=entries)
