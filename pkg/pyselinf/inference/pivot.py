"""
Conditional CDF pivots and p-values

The pivot of a contrast is its conditional distribution function evaluated
at the observed estimate.  It is uniform given the selection when theta is
the true value, which makes it and its tail transforms valid p-values.
"""
from logging import getLogger

import numpy as np

from ..pyselinf_errors import PyselinfConfigError
from ..sov.orthant import functional_orthant, gibson_reorder, LinearGaussianFunctional
from ..sov.estimators import replicate_ratios, replicate_summary, tail_ratios, McEstimate
from .laws import conditional_law, selection_geometry
from .report import InferenceReport, ReportEntry

ALTERNATIVES = ('less', 'greater', 'two-sided')


def _transform(ratios, alternative):
    if alternative == 'less':
        return ratios
    if alternative == 'greater':
        return 1.0 - ratios
    return 2.0 * np.minimum(ratios, 1.0 - ratios)


def _transform_tails(tails, alternative):
    if alternative == 'less':
        return tails[:, 0]
    if alternative == 'greater':
        return tails[:, 1]
    return np.minimum(2.0 * tails.min(axis=1), 1.0)


def pivot_replicates(law, x, reps, preintegrate=True):
    """
    Per-replicate estimates of the conditional CDF of a law at x

    :param law: :class:`pyselinf.inference.laws.ConditionalLaw`
    :param x: evaluation point
    :param reps: replicate set of dimension >= d - 1
    :param preintegrate: integrate the last variable out analytically
    """
    og = gibson_reorder(law.mu_b, law.Sigma_b)
    g1, g2 = law.functional(x)
    fnl = LinearGaussianFunctional.from_b_space(og, g1, g2)
    return replicate_ratios(og, fnl, reps, preintegrate)


def tail_replicates(law, x, reps, preintegrate=True):
    """
    Per-replicate lower and upper tails of the conditional law at x

    Both tails are estimated directly, each by its own SOV pass.

    :param law: :class:`pyselinf.inference.laws.ConditionalLaw`
    :param x: evaluation point
    :param reps: replicate set of dimension >= d
    :param preintegrate: integrate the last two variables out analytically
    :return: array of shape (R, 2) holding F(x) and 1 - F(x)
    """
    og = gibson_reorder(law.mu_b, law.Sigma_b)
    g1, g2 = law.functional(x)
    tails = [functional_orthant(law.mu_b, law.Sigma_b, g1, g2, upper) for upper in (False, True)]
    return tail_ratios(og, tails, reps, preintegrate)


def pvalue(record, eta, theta, reps, alternative='less', preintegrate=True, require_stderr=True,
           geometry=None, direct_tails=True):
    """
    p-value of eta^T beta_M = theta from the conditional CDF at the observed estimate

    'less' returns F(theta_hat), 'greater' 1 - F(theta_hat) and 'two-sided'
    2 min(F, 1 - F).  The two-sided value is computed per replicate, so its
    standard error is the spread of the transformed replicates.  With
    direct_tails each tail is its own orthant probability ratio, which keeps
    small p-values precise; otherwise the tails come from the integrated
    functional as F and 1 - F.

    :param record: :class:`pyselinf.selection.kkt.SelectionRecord`
    :param eta: contrast of length d
    :param theta: hypothesised value
    :param reps: replicate set
    :param alternative: 'less', 'greater' or 'two-sided'
    :param preintegrate: integrate the last variable out analytically
    :param require_stderr: raise InsufficientReplicates with a single replicate
    :param geometry: precomputed selection geometry
    :param direct_tails: estimate each tail by its own SOV pass
    :return: :data:`pyselinf.sov.estimators.McEstimate`
    """
    # pylint: disable=too-many-arguments
    logger = getLogger(__name__)
    if alternative not in ALTERNATIVES:
        msg = "Alternative '{}' not supported".format(alternative)
        logger.error(msg)
        raise PyselinfConfigError(msg)
    law = conditional_law(record, eta, theta, geometry=geometry)
    if direct_tails:
        values = _transform_tails(tail_replicates(law, law.theta_hat, reps, preintegrate), alternative)
    else:
        values = _transform(pivot_replicates(law, law.theta_hat, reps, preintegrate), alternative)
    estimate = replicate_summary(values, require_stderr)
    logger.debug("Pivot at theta=%.6g: %.6g (stderr %.3g)", theta, estimate.value, estimate.stderr)
    return McEstimate(float(np.clip(estimate.value, 0.0, 1.0)), estimate.stderr)


def test_all_coordinates(record, reps, alternative='two-sided', alpha=0.05):
    """
    p-values of a zero coefficient for every selected variable

    :param record: selection record
    :param reps: replicate set shared by all coordinates
    :param alternative: 'less', 'greater' or 'two-sided'
    :param alpha: level stored in the report
    :rtype: :class:`pyselinf.inference.report.InferenceReport`
    """
    geometry = selection_geometry(record)
    entries = []
    for j in range(record.d):
        eta = np.zeros(record.d)
        eta[j] = 1.0
        estimate = pvalue(record, eta, 0.0, reps, alternative, require_stderr=False, geometry=geometry)
        entries.append(ReportEntry(index=int(record.active[j]), estimate=float(record.beta_hat[j]),
                                   pvalue=estimate.value, pvalue_stderr=estimate.stderr))
    return InferenceReport(method='cdf-sov', alpha=alpha, entries=entries)

