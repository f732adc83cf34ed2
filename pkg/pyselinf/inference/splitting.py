"""
Data splitting baseline: least squares on the hold-out rows only
"""
import numpy as np

from ..pyselinf_errors import PyselinfConfigError, RankDeficient
from ..util.special import norm_sf, norm_inv_cdf
from .report import InferenceReport, ReportEntry


def splitting_baseline(record, alpha):
    """
    z-intervals for the selected coefficients from the hold-out rows

    :param record: selection record with hold-out rows
    :param alpha: level, in (0, 1)
    :rtype: :class:`pyselinf.inference.report.InferenceReport`
    :raises PyselinfConfigError: without hold-out rows
    :raises RankDeficient: if the hold-out rows do not identify the submodel
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("Level must lie in (0, 1), got {}".format(alpha))
    holdout = record.holdout_data()
    if holdout is None:
        raise PyselinfConfigError("Selection record has no hold-out rows")
    X2, Y2 = holdout
    if X2.shape[0] <= record.d or np.linalg.matrix_rank(X2) < record.d:
        raise RankDeficient("{} hold-out rows do not identify {} coefficients".format(X2.shape[0], record.d))
    gram_inv = np.linalg.inv(X2.T @ X2)
    coef = gram_inv @ (X2.T @ Y2)
    stderr = np.sqrt(record.sigma2 * np.diag(gram_inv))
    quantile = norm_inv_cdf(1.0 - alpha / 2.0)
    entries = []
    for j, col in enumerate(record.active):
        entries.append(ReportEntry(index=int(col), estimate=float(coef[j]),
                                   pvalue=float(2.0 * norm_sf(abs(coef[j]) / stderr[j])),
                                   lower=float(coef[j] - quantile * stderr[j]),
                                   upper=float(coef[j] + quantile * stderr[j])))
    return InferenceReport(method='splitting', alpha=alpha, entries=entries)
