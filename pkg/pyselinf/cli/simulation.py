"""
Simulation study harness

Every repetition simulates a dataset, carves, selects and runs the requested
inference methods, recording for each selected coefficient whether its
interval covers the submodel target X_M^+ X beta.  Repetition i draws all of
its randomness from the i-th child of the master seed, so results do not
depend on scheduling.  Within a repetition the child seed is split again into
the streams named in :data:`STREAMS`.
"""
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from logging import getLogger

import numpy as np
import pandas as pd

from ..pyselinf_errors import PyselinfError, EmptyModel
from ..qmc.batchfactory import child_seeds, replicate_set
from ..selection.dataset import Dataset
from ..selection.lasso import lambda_theory, lambda_cv
from ..selection.carving import carve_split, carve_and_select
from ..inference.intervals import confidence_intervals
from ..inference.mle import MleOptions, selective_mle
from ..inference.splitting import splitting_baseline
from ..baselines.hitandrun import HitAndRunConfig, hit_and_run_intervals

STREAMS = ('data', 'split', 'rqmc', 'mle', 'chain', 'cv')
# Entropy appended to the master seed for the bootstrap stream
BOOTSTRAP_STREAM = 0xB007
NOISE_VARIANCE = 1.0


@dataclass
class ResultTable(object):
    """
    Rows of a results table with a fixed column order

    :param columns: column names
    :param rows: list of dictionaries keyed by column name
    """
    columns: tuple
    rows: list = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            coverage = row.get('coverage', float('nan'))
            if not np.isnan(coverage) and not 0.0 <= coverage <= 1.0:
                raise ValueError("Coverage {} outside [0, 1]".format(coverage))

    def __len__(self):
        return len(self.rows)

    def to_frame(self):
        """:rtype: :class:`pandas.DataFrame`"""
        return pd.DataFrame(self.rows, columns=list(self.columns))

    @classmethod
    def from_frame(cls, frame):
        """Rebuild a table from :meth:`to_frame` output"""
        return cls(columns=tuple(frame.columns), rows=frame.to_dict(orient='records'))


def covariance_matrix(p, kind='ar', correlation=0.9):
    """
    Feature covariance of the simulated designs

    'ar' gives correlation^|i-j|, 'equi' gives correlation off the diagonal
    and 1 on it.

    :param p: number of features
    :param kind: 'ar' or 'equi'
    :param correlation: correlation parameter
    """
    if kind == 'ar':
        lags = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
        return correlation ** lags
    if kind == 'equi':
        return correlation * np.ones((p, p)) + (1.0 - correlation) * np.eye(p)
    raise ValueError("Unknown covariance kind '{}'".format(kind))


def signal_strength(signal, n, p):
    """Magnitude sqrt(2 c0 log(p) / n) of the nonzero coefficients"""
    return float(np.sqrt(2.0 * signal * np.log(p) / n))


def simulate_dataset(cfg, seed):
    """
    Gaussian design, sparse coefficients with random positions and signs, unit noise

    :param cfg: :class:`pyselinf.cli.config.ExperimentConfig`
    :param seed: data seed
    :return: tuple (dataset with known unit noise variance, true coefficients)
    """
    rng = np.random.default_rng(seed)
    factor = np.linalg.cholesky(covariance_matrix(cfg.p, cfg.covariance, cfg.correlation))
    X = rng.standard_normal((cfg.n, cfg.p)) @ factor.T
    beta = np.zeros(cfg.p)
    support = rng.choice(cfg.p, size=cfg.sparsity, replace=False)
    beta[support] = rng.choice([-1.0, 1.0], size=cfg.sparsity) * signal_strength(cfg.signal, cfg.n, cfg.p)
    Y = X @ beta + np.sqrt(NOISE_VARIANCE) * rng.standard_normal(cfg.n)
    return Dataset(X, Y, sigma2=NOISE_VARIANCE), beta


def choose_lambda(cfg, data, split_seed, cv_seed):
    """
    Penalty of the carving lasso on the unnormalised scale

    The per-observation rule is applied to the selection rows and multiplied
    by the full sample size, matching the 1/rho scaled selection loss.  The
    theoretical rule scales with the noise standard deviation when known.

    :param cfg: experiment configuration
    :param data: full dataset
    :param split_seed: seed of the carving split
    :param cv_seed: fold seed for cross-validation
    """
    selection = carve_split(data, cfg.rho, split_seed).selection
    if cfg.lambda_rule == 'cv':
        return lambda_cv(selection, seed=cv_seed) * data.n
    noise_sd = np.sqrt(data.sigma2) if data.sigma2 is not None else 1.0
    return noise_sd * lambda_theory(data.p, selection.n) * data.n


def run_methods(cfg, record, seeds):
    """
    Inference reports of every configured method

    :param cfg: experiment configuration
    :param record: selection record
    :param seeds: dictionary of stream seeds
    :return: tuple (dictionary method -> report or None on failure, dictionary method -> seconds)
    """
    logger = getLogger(__name__)
    reports = {}
    seconds = {}
    for method in cfg.methods:
        start = time.perf_counter()
        try:
            if method == 'splitting':
                reports[method] = splitting_baseline(record, cfg.alpha)
            elif method == 'cdf-sov':
                reps = replicate_set(record.d, cfg.rqmc_n, cfg.replicates, seeds['rqmc'], cfg.generator)
                reports[method] = confidence_intervals(record, cfg.alpha, reps)
            elif method == 'mle-sov':
                options = MleOptions(n=cfg.rqmc_n, center=cfg.mle_center, seed=seeds['mle'])
                reports[method] = selective_mle(record, options, cfg.alpha).to_report(record.active)
            elif method == 'hit-and-run':
                chain = HitAndRunConfig(n=cfg.hnr_factor * cfg.rqmc_n, burn_in=cfg.burn_in, seed=seeds['chain'])
                reports[method] = hit_and_run_intervals(record, cfg.alpha, chain)
        except PyselinfError as error:
            logger.warning("Method %s failed: %s", method, error)
            reports[method] = None
        seconds[method] = time.perf_counter() - start
    return reports, seconds


def run_repetition(cfg, index, seed):
    """
    One repetition of the study

    :param cfg: experiment configuration
    :param index: repetition number, for logging
    :param seed: repetition seed
    :return: dictionary with 'status' ('ok', 'empty' or 'failed') and per-method
        'covered', 'lengths', 'stderrs' and 'seconds' entries
    """
    logger = getLogger(__name__)
    seeds = dict(zip(STREAMS, child_seeds(seed, len(STREAMS))))
    outcome = {'index': index, 'status': 'ok', 'selected': 0, 'methods': {}}
    try:
        data, beta = simulate_dataset(cfg, seeds['data'])
        lam = choose_lambda(cfg, data, seeds['split'], seeds['cv'])
        record = carve_and_select(data, lam, cfg.rho, seeds['split'], target=cfg.target)
    except EmptyModel:
        logger.warning("Repetition %d selected no variables, skipped", index)
        outcome['status'] = 'empty'
        return outcome
    except PyselinfError as error:
        logger.warning("Repetition %d failed during selection: %s", index, error)
        outcome['status'] = 'failed'
        return outcome

    truth = record.A @ (data.X @ beta)
    outcome['selected'] = record.d
    reports, seconds = run_methods(cfg, record, seeds)
    for method, report in reports.items():
        if report is None:
            outcome['methods'][method] = None
            continue
        outcome['methods'][method] = {
            'covered': [entry.covers(value) for entry, value in zip(report.entries, truth)],
            'lengths': [entry.length for entry in report.entries],
            'stderrs': [entry.pvalue_stderr for entry in report.entries],
            'seconds': seconds[method],
        }
    logger.info("Repetition %d done, %d variables selected", index, record.d)
    return outcome


def _repetition_worker(args):
    return run_repetition(*args)


def bootstrap_interval(totals, counts, resamples, rng, level=0.95):
    """
    Percentile bootstrap over repetitions of a pooled ratio sum(totals) / sum(counts)

    :param totals: per-repetition sums
    :param counts: per-repetition counts
    :param resamples: number of bootstrap draws
    :param rng: numpy generator
    :param level: interval level
    :return: tuple (lower, upper)
    """
    totals = np.asarray(totals, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if totals.size == 0 or counts.sum() == 0:
        return float('nan'), float('nan')
    draws = rng.integers(totals.size, size=(resamples, totals.size))
    with np.errstate(invalid='ignore', divide='ignore'):
        ratios = totals[draws].sum(axis=1) / counts[draws].sum(axis=1)
    tail = 50.0 * (1.0 - level)
    lower, upper = np.nanpercentile(ratios, [tail, 100.0 - tail])
    return float(lower), float(upper)


SIMULATION_COLUMNS = ('method', 'n', 'p', 'covariance', 'signal', 'rho', 'lambda_rule', 'alpha', 'repetitions',
                      'used', 'empty', 'failed', 'coordinates', 'coverage', 'coverage_lower', 'coverage_upper',
                      'length', 'length_lower', 'length_upper', 'pvalue_stderr')


def summarize(cfg, outcomes):
    """
    Fold repetition outcomes into one row per method, in repetition order

    :param cfg: experiment configuration
    :param outcomes: list of :func:`run_repetition` results
    :rtype: :class:`ResultTable`
    """
    # pylint: disable=too-many-locals
    columns = SIMULATION_COLUMNS + (('seconds',) if cfg.timings else ())
    rows = []
    if not outcomes:
        return ResultTable(columns=columns)
    rng = np.random.default_rng([cfg.seed, BOOTSTRAP_STREAM])
    empty = sum(outcome['status'] == 'empty' for outcome in outcomes)
    for method in cfg.methods:
        kept = [outcome['methods'][method] for outcome in outcomes
                if outcome['status'] == 'ok' and outcome['methods'].get(method) is not None]
        failed = sum(outcome['status'] == 'failed' or
                     (outcome['status'] == 'ok' and outcome['methods'].get(method) is None)
                     for outcome in outcomes)
        counts = [len(result['covered']) for result in kept]
        covered = [float(np.sum(result['covered'])) for result in kept]
        lengths = [float(np.nansum(result['lengths'])) for result in kept]
        finite = [int(np.sum(np.isfinite(result['lengths']))) for result in kept]
        stderrs = np.concatenate([result['stderrs'] for result in kept]) if kept else np.array([])
        total = float(np.sum(counts))
        coverage_bounds = bootstrap_interval(covered, counts, cfg.bootstrap, rng)
        length_bounds = bootstrap_interval(lengths, finite, cfg.bootstrap, rng)
        row = {'method': method, 'n': cfg.n, 'p': cfg.p, 'covariance': cfg.covariance, 'signal': cfg.signal,
               'rho': cfg.rho, 'lambda_rule': cfg.lambda_rule, 'alpha': cfg.alpha, 'repetitions': len(outcomes),
               'used': len(kept), 'empty': empty, 'failed': failed, 'coordinates': int(total),
               'coverage': sum(covered) / total if total else float('nan'),
               'coverage_lower': coverage_bounds[0], 'coverage_upper': coverage_bounds[1],
               'length': sum(lengths) / sum(finite) if sum(finite) else float('nan'),
               'length_lower': length_bounds[0], 'length_upper': length_bounds[1],
               'pvalue_stderr': float(np.nanmean(stderrs)) if np.any(np.isfinite(stderrs)) else float('nan')}
        if cfg.timings:
            row['seconds'] = float(np.mean([result['seconds'] for result in kept])) if kept else float('nan')
        rows.append(row)
    return ResultTable(columns=columns, rows=rows)


def run_simulation(cfg):
    """
    Run the configured number of repetitions and summarise them

    :param cfg: :class:`pyselinf.cli.config.ExperimentConfig`
    :rtype: :class:`ResultTable`
    """
    logger = getLogger(__name__)
    seeds = child_seeds(cfg.seed, cfg.repetitions)
    jobs = [(cfg, index, seed) for index, seed in enumerate(seeds)]
    logger.info("Running %d repetitions on %d worker(s)", len(jobs), cfg.workers)
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_repetition_worker, jobs))
    else:
        outcomes = [_repetition_worker(job) for job in jobs]
    failed = sum(outcome['status'] == 'failed' for outcome in outcomes)
    if failed:
        logger.warning("%d of %d repetitions failed during selection", failed, len(outcomes))
    return summarize(cfg, outcomes)
