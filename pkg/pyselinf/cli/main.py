"""
Command-line interface

Sub-commands::

    pyselinf simulate --repetitions 200 --out coverage.csv
    pyselinf infer --design X.csv --response y.csv --out report.csv
    pyselinf mle --design X.csv --response y.csv --format json
    pyselinf compare-samplers --rqmc-n 4096 --replicates 50

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""
import argparse
import logging
import sys
from logging import getLogger

from .. import __version__
from ..pyselinf_errors import PyselinfError, PyselinfConfigError, EXIT_CONFIG_ERROR
from ..qmc.batchfactory import child_seeds, replicate_set
from ..selection.dataset import estimate_sigma2
from ..selection.carving import carve_and_select
from ..inference.intervals import confidence_intervals
from ..inference.mle import MleOptions, selective_mle
from ..inference.splitting import splitting_baseline
from .config import SCENARIOS, COVARIANCES, LAMBDA_RULES, FORMATS, resolve_config
from .ingest import ingest_csv
from .simulation import STREAMS, choose_lambda, run_simulation
from .compare import run_compare
from .emit import emit, write_manifest

# Command-line destinations that are not configuration fields
NON_CONFIG_ARGS = ('command', 'config', 'verbose')


def _methods(text):
    return tuple(item.strip() for item in text.split(',') if item.strip())


def build_parser():
    """
    Argument parser with one sub-command per scenario

    :rtype: :class:`argparse.ArgumentParser`
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="INI file with an [experiment] section")
    common.add_argument('--seed', type=int, help="master seed")
    common.add_argument('--alpha', type=float, help="level of the intervals")
    common.add_argument('--rqmc-n', dest='rqmc_n', type=int, help="RQMC points per replicate")
    common.add_argument('--replicates', type=int, help="randomized replicates R")
    common.add_argument('--lambda', dest='lambda_rule', choices=LAMBDA_RULES, help="penalty rule")
    common.add_argument('--rho', type=float, help="carving fraction")
    common.add_argument('--target', choices=('submodel', 'full'), help="target of inference")
    common.add_argument('--out', help="output file, standard output when omitted")
    common.add_argument('--format', choices=FORMATS, help="output format")
    common.add_argument('-v', '--verbose', action='count', default=0, help="-v for progress, -vv for debug")

    simulated = argparse.ArgumentParser(add_help=False)
    simulated.add_argument('--n', type=int, help="observations")
    simulated.add_argument('--p', type=int, help="features")
    simulated.add_argument('--covariance', choices=COVARIANCES, help="design covariance")
    simulated.add_argument('--correlation', type=float, help="covariance parameter")
    simulated.add_argument('--signal', type=float, help="signal constant c0")
    simulated.add_argument('--sparsity', type=int, help="nonzero coefficients")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument('--design', help="design matrix CSV")
    data.add_argument('--response', help="response CSV")
    data.add_argument('--response-column', dest='response_column', help="response column of the design file")
    data.add_argument('--header', action='store_const', const=True, help="CSV files have a header line")
    data.add_argument('--min-feature-count', dest='min_feature_count', type=int,
                      help="drop features with fewer nonzero entries")
    data.add_argument('--sigma2', type=float, help="known noise variance, estimated when omitted")

    parser = argparse.ArgumentParser(prog='pyselinf', description="Selective inference after the randomized lasso")
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    simulate = commands.add_parser('simulate', parents=[common, simulated], help="coverage simulation study")
    simulate.add_argument('--repetitions', type=int, help="repetitions of the study")
    simulate.add_argument('--methods', type=_methods, help="comma separated inference methods")
    simulate.add_argument('--workers', type=int, help="parallel processes")
    simulate.add_argument('--timings', action='store_const', const=True, help="report wall-clock seconds")

    commands.add_parser('infer', parents=[common, data], help="intervals and p-values for a dataset")

    mle = commands.add_parser('mle', parents=[common, data], help="selective MLE for a dataset")
    mle.add_argument('--mle-center', dest='mle_center', choices=('mle', 'observed'), help="Wald interval centre")

    compare = commands.add_parser('compare-samplers', parents=[common, simulated],
                                  help="SOV against hit-and-run precision")
    compare.add_argument('--compare-n', dest='compare_n', type=int, help="SOV points per randomization")
    compare.add_argument('--burn-in', dest='burn_in', type=int, help="hit-and-run burn-in")
    compare.add_argument('--hnr-factor', dest='hnr_factor', type=int, help="chain length relative to SOV points")
    compare.add_argument('--timings', action='store_const', const=True, help="report wall-clock seconds")
    return parser


def setup_logging(verbosity):
    """
    Configure the root handler once

    :param verbosity: 0 warnings, 1 info, 2 or more debug
    """
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def load_dataset(cfg):
    """
    Dataset named by the configuration, with its noise variance attached

    :param cfg: resolved configuration
    :rtype: :class:`pyselinf.selection.dataset.Dataset`
    """
    if cfg.design is None:
        raise PyselinfConfigError("A design CSV is needed (--design)")
    dataset = ingest_csv(cfg.design, cfg.response, header=cfg.header, response_column=cfg.response_column,
                         min_feature_count=cfg.min_feature_count, sigma2=cfg.sigma2)
    if dataset.sigma2 is None:
        dataset = dataset.with_sigma2(estimate_sigma2(dataset))
    return dataset


def select(cfg, dataset):
    """
    Carve, choose the penalty and select on a dataset

    :param cfg: resolved configuration
    :param dataset: dataset with known or estimated noise variance
    :return: tuple (selection record, stream seeds)
    """
    seeds = dict(zip(STREAMS, child_seeds(cfg.seed, len(STREAMS))))
    lam = choose_lambda(cfg, dataset, seeds['split'], seeds['cv'])
    record = carve_and_select(dataset, lam, cfg.rho, seeds['split'], target=cfg.target)
    return record, seeds


def run_infer(cfg, dataset):
    """
    Selective intervals with null p-values, and the splitting baseline

    :param cfg: resolved configuration
    :param dataset: dataset with known or estimated noise variance
    :return: list of :class:`pyselinf.inference.report.InferenceReport`
    """
    logger = getLogger(__name__)
    record, seeds = select(cfg, dataset)
    reps = replicate_set(record.d, cfg.rqmc_n, cfg.replicates, seeds['rqmc'], cfg.generator)
    reports = [confidence_intervals(record, cfg.alpha, reps)]
    try:
        reports.append(splitting_baseline(record, cfg.alpha))
    except PyselinfError as error:
        logger.warning("Splitting baseline omitted: %s", error)
    return reports


def run_mle(cfg, dataset):
    """
    Selective MLE with Wald intervals

    :param cfg: resolved configuration
    :param dataset: dataset with known or estimated noise variance
    :rtype: :class:`pyselinf.inference.report.InferenceReport`
    """
    record, seeds = select(cfg, dataset)
    options = MleOptions(n=cfg.rqmc_n, center=cfg.mle_center, seed=seeds['mle'])
    return selective_mle(record, options, cfg.alpha).to_report(record.active)


def run(cfg):
    """
    Dispatch a resolved configuration to its scenario

    :param cfg: resolved configuration
    :return: report(s) or result table
    """
    logger = getLogger(__name__)
    if cfg.scenario == 'simulate':
        return run_simulation(cfg)
    if cfg.scenario == 'compare-samplers':
        return run_compare(cfg)
    if cfg.scenario == 'infer':
        return run_infer(cfg, load_dataset(cfg))
    if cfg.scenario == 'mle':
        return run_mle(cfg, load_dataset(cfg))

    msg = "Scenario '{}' not implemented, use one of {}".format(cfg.scenario, ', '.join(SCENARIOS))
    logger.error(msg)
    raise PyselinfConfigError(msg)


def main(argv=None):
    """
    Entry point of the pyselinf command

    :param argv: arguments, default sys.argv[1:]
    :return: exit code
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    logger = getLogger(__name__)
    overrides = {key: value for key, value in vars(args).items() if key not in NON_CONFIG_ARGS}
    overrides['scenario'] = args.command
    try:
        cfg = resolve_config(args.config, overrides)
        result = run(cfg)
        emit(result, cfg.format, cfg.out)
        if cfg.out is not None:
            write_manifest(cfg, cfg.out)
    except PyselinfError as error:
        logger.error("%s", error)
        return error.code
    except ValueError as error:
        logger.error("Invalid argument: %s", error)
        return EXIT_CONFIG_ERROR
    return 0


if __name__ == '__main__':
    sys.exit(main())
