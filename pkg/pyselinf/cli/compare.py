"""
Head-to-head comparison of the SOV and hit-and-run samplers

One carving instance is simulated and selected.  For every selected
coefficient the null p-value is estimated R times by each sampler, with SOV
on N points and hit-and-run on hnr_factor * N retained states after burn-in.
Mode finding and direction set-up of the chain are done before its clock
starts.
"""
import time
from logging import getLogger

import numpy as np

from ..qmc.batchfactory import child_seeds
from ..selection.carving import carve_and_select
from ..sov.estimators import replicate_summary
from ..inference.laws import conditional_law, selection_geometry
from ..baselines.samplerfactory import truncated_sampler
from .simulation import ResultTable, STREAMS, simulate_dataset, choose_lambda

COMPARE_COLUMNS = ('method', 'index', 'estimate', 'points', 'pvalue', 'pvalue_stderr')


def sampler_pvalues(kind, law, points, seeds, burn_in):
    """
    Replicated two-sided null p-values from one sampler kind

    :param kind: 'sov' or 'hit-and-run'
    :param law: conditional law at theta = 0
    :param points: points or retained states per replicate
    :param seeds: one seed per replicate
    :param burn_in: discarded chain states
    :return: tuple (list of p-values, sampling seconds)
    """
    seconds = 0.0
    values = []
    for seed in seeds:
        sampler = truncated_sampler(kind, n=points, seed=seed, burn_in=burn_in)
        og = sampler.orthant(law)
        sampler.prepare(og)
        start = time.perf_counter()
        values.append(sampler.two_sided_pvalue(law, law.theta_hat, og))
        seconds += time.perf_counter() - start
    return values, seconds


def run_compare(cfg):
    """
    Compare p-value precision of both samplers on one simulated instance

    :param cfg: :class:`pyselinf.cli.config.ExperimentConfig`
    :rtype: :class:`pyselinf.cli.simulation.ResultTable`
    :raises EmptyModel: if the instance selects no variables
    """
    # pylint: disable=too-many-locals
    logger = getLogger(__name__)
    seeds = dict(zip(STREAMS, child_seeds(cfg.seed, len(STREAMS))))
    data, _ = simulate_dataset(cfg, seeds['data'])
    lam = choose_lambda(cfg, data, seeds['split'], seeds['cv'])
    record = carve_and_select(data, lam, cfg.rho, seeds['split'], target=cfg.target)
    geometry = selection_geometry(record)
    sov_seeds = child_seeds(seeds['rqmc'], cfg.replicates)
    chain_seeds = child_seeds(seeds['chain'], cfg.replicates)
    plans = (('cdf-sov', 'sov', cfg.compare_n, sov_seeds),
             ('hit-and-run', 'hit-and-run', cfg.hnr_factor * cfg.compare_n, chain_seeds))

    columns = COMPARE_COLUMNS + (('seconds',) if cfg.timings else ())
    rows = []
    for j in range(record.d):
        eta = np.zeros(record.d)
        eta[j] = 1.0
        law = conditional_law(record, eta, 0.0, geometry=geometry)
        for method, kind, points, run_seeds in plans:
            values, seconds = sampler_pvalues(kind, law, points, run_seeds, cfg.burn_in)
            estimate = replicate_summary(np.array(values))
            row = {'method': method, 'index': int(record.active[j]), 'estimate': float(record.beta_hat[j]),
                   'points': int(points), 'pvalue': float(estimate.value), 'pvalue_stderr': float(estimate.stderr)}
            if cfg.timings:
                row['seconds'] = seconds
            rows.append(row)
            logger.info("Variable %d %s: p=%.4g (stderr %.3g)", record.active[j], method, estimate.value,
                        estimate.stderr)
    return ResultTable(columns=columns, rows=rows)
