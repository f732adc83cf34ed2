"""
Per-coordinate inference results
"""
from dataclasses import dataclass, field, asdict, fields

import numpy as np
import pandas as pd

METHODS = ('cdf-sov', 'mle-sov', 'splitting', 'hit-and-run')


@dataclass(frozen=True)
class ReportEntry(object):
    """
    Inference for one selected coefficient

    :param index: column of the design the coefficient belongs to
    :param estimate: point estimate
    :param pvalue: two-sided p-value for a zero coefficient
    :param lower: lower confidence limit (NaN when not computed)
    :param upper: upper confidence limit (NaN when not computed)
    :param pvalue_stderr: Monte Carlo standard error of the p-value
    :param boundary_stderr: Monte Carlo standard error of the p-values at the confidence limits
    :param min_ess: smallest effective sample size used
    :param flags: ';'-separated diagnostics, empty when clean
    """
    # pylint: disable=too-many-instance-attributes
    index: int
    estimate: float
    pvalue: float
    lower: float = float('nan')
    upper: float = float('nan')
    pvalue_stderr: float = float('nan')
    boundary_stderr: float = float('nan')
    min_ess: float = float('nan')
    flags: str = ''

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("Confidence limits out of order: {} > {}".format(self.lower, self.upper))
        if not np.isnan(self.pvalue) and not 0.0 <= self.pvalue <= 1.0:
            raise ValueError("p-value {} outside [0, 1]".format(self.pvalue))

    @property
    def length(self):
        """Interval length"""
        return self.upper - self.lower

    def covers(self, value):
        """True when value lies in the closed interval"""
        return bool(self.lower <= value <= self.upper)


@dataclass
class InferenceReport(object):
    """
    Entries for the selected coefficients produced by one method

    :param method: one of 'cdf-sov', 'mle-sov', 'splitting', 'hit-and-run'
    :param alpha: level of the intervals
    :param entries: list of :class:`ReportEntry`
    """
    method: str
    alpha: float
    entries: list = field(default_factory=list)

    COLUMNS = tuple(f.name for f in fields(ReportEntry))

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError("Unknown inference method '{}'".format(self.method))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def to_frame(self):
        """
        One row per entry, with method and level columns

        :rtype: :class:`pandas.DataFrame`
        """
        frame = pd.DataFrame([asdict(entry) for entry in self.entries], columns=list(self.COLUMNS))
        frame.insert(0, 'alpha', float(self.alpha))
        frame.insert(0, 'method', self.method)
        return frame

    @classmethod
    def from_frame(cls, frame):
        """
        Rebuild a report from :meth:`to_frame` output

        :param frame: data frame with the report columns
        """
        if frame.empty:
            raise ValueError("Cannot infer method and level from an empty frame")
        entries = []
        for row in frame.to_dict(orient='records'):
            flags = row['flags']
            entries.append(ReportEntry(index=int(row['index']), estimate=float(row['estimate']),
                                       pvalue=float(row['pvalue']), lower=float(row['lower']),
                                       upper=float(row['upper']), pvalue_stderr=float(row['pvalue_stderr']),
                                       boundary_stderr=float(row['boundary_stderr']),
                                       min_ess=float(row['min_ess']),
                                       flags='' if not isinstance(flags, str) else flags))
        first = frame.iloc[0]
        return cls(method=str(first['method']), alpha=float(first['alpha']), entries=entries)
