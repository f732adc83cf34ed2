"""
Writing and reading result files

Reports and result tables are written as CSV with 17 significant digits or
as JSON records, both of which read back to identical floats.  Every run
also leaves a JSON manifest next to its output.
"""
import json
import sys
from logging import getLogger

import numpy as np
import pandas as pd
import scipy

from .. import __version__
from ..pyselinf_errors import PyselinfConfigError, ParseError
from ..inference.report import InferenceReport
from .simulation import ResultTable

FLOAT_FORMAT = '%.17g'
SEED_SCHEME = ("numpy SeedSequence(seed).spawn: repetition i uses child i; each child is spawned again into "
               "the streams data, split, rqmc, mle, chain, cv; bootstrap uses SeedSequence([seed, 0xB007])")


def as_frame(result):
    """
    Data frame of a report, a list of reports or a result table

    :param result: :class:`InferenceReport`, list of them, or :class:`ResultTable`
    :rtype: :class:`pandas.DataFrame`
    """
    if isinstance(result, (list, tuple)):
        frames = [as_frame(item) for item in result]
        if not frames:
            raise ValueError("Nothing to write")
        return pd.concat(frames, ignore_index=True)
    if isinstance(result, (InferenceReport, ResultTable)):
        return result.to_frame()
    raise TypeError("Cannot write object of type {}".format(type(result).__name__))


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError("Not serializable: {!r}".format(value))


def frame_to_json(frame):
    """JSON text of a frame as column list plus records"""
    document = {'columns': list(frame.columns), 'rows': frame.to_dict(orient='records')}
    return json.dumps(document, default=_json_default, indent=1)


def emit(result, fmt='csv', path=None):
    """
    Write a result as CSV or JSON

    :param result: report(s) or result table
    :param fmt: 'csv' or 'json'
    :param path: output file, None for standard output
    :raises PyselinfConfigError: if the format is unknown or the file cannot be written
    """
    logger = getLogger(__name__)
    frame = as_frame(result)
    if fmt == 'csv':
        text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep='NaN', lineterminator='\n')
    elif fmt == 'json':
        text = frame_to_json(frame) + '\n'
    else:
        msg = "Output format '{}' not supported".format(fmt)
        logger.error(msg)
        raise PyselinfConfigError(msg)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, 'w') as handle:
            handle.write(text)
    except OSError as error:
        raise PyselinfConfigError("Cannot write '{}': {}".format(path, error))
    logger.info("Wrote %d rows to %s", frame.shape[0], path)


def load_frame(path, fmt='csv'):
    """
    Read a file written by :func:`emit`

    :param path: file path
    :param fmt: 'csv' or 'json'
    :rtype: :class:`pandas.DataFrame`
    :raises ParseError: if the file cannot be read
    """
    try:
        if fmt == 'csv':
            return pd.read_csv(path, keep_default_na=False, na_values=['NaN', 'nan'], float_precision='round_trip')
        with open(path, 'r') as handle:
            document = json.load(handle)
        return pd.DataFrame(document['rows'], columns=document['columns'])
    except (OSError, ValueError, KeyError) as error:
        raise ParseError("Cannot read results '{}': {}".format(path, error), path=path)


def load_reports(path, fmt='csv'):
    """
    Reports of a file written by :func:`emit`, one per method in file order

    :param path: file path
    :param fmt: 'csv' or 'json'
    :return: list of :class:`InferenceReport`
    """
    frame = load_frame(path, fmt)
    return [InferenceReport.from_frame(frame[frame['method'] == method])
            for method in pd.unique(frame['method'])]


def manifest_path(path):
    """Manifest file belonging to an output path"""
    return '{}.manifest.json'.format(path)


def write_manifest(cfg, path):
    """
    Record what is needed to reproduce a run next to its output

    :param cfg: resolved :class:`pyselinf.cli.config.ExperimentConfig`
    :param path: output file the manifest belongs to
    :return: manifest path
    """
    logger = getLogger(__name__)
    manifest = {'config': cfg.to_dict(), 'seed': cfg.seed, 'seed_scheme': SEED_SCHEME,
                'versions': {'pyselinf': __version__, 'numpy': np.__version__, 'scipy': scipy.__version__,
                             'pandas': pd.__version__}}
    target = manifest_path(path)
    try:
        with open(target, 'w') as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True)
            handle.write('\n')
    except OSError as error:
        raise PyselinfConfigError("Cannot write '{}': {}".format(target, error))
    logger.info("Wrote manifest %s", target)
    return target
