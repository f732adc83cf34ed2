"""
CSV ingestion of a design matrix and response
"""
from logging import getLogger

import numpy as np
import pandas as pd

from ..pyselinf_errors import ParseError, ShapeMismatch, PyselinfConfigError
from ..selection.dataset import Dataset
from ..util.print_helpers import index_list_to_string


def read_numeric_csv(path, header=False):
    """
    Read a rectangular CSV of finite numbers

    :param path: file path
    :param header: True when the first line names the columns
    :return: :class:`pandas.DataFrame` of floats
    :raises ParseError: naming the file, line and column of the first bad cell
    """
    try:
        raw = pd.read_csv(path, header=0 if header else None, dtype=str, keep_default_na=False,
                          skipinitialspace=True)
    except OSError as error:
        raise ParseError("Cannot read '{}': {}".format(path, error), path=path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise ParseError("Malformed CSV '{}': {}".format(path, error), path=path)
    values = raw.apply(pd.to_numeric, errors='coerce')
    bad = ~np.isfinite(values.to_numpy(dtype=float))
    if bad.any():
        row, column = (int(i) for i in np.argwhere(bad)[0])
        line = row + (2 if header else 1)
        raise ParseError("Non-finite or non-numeric value '{}' in {} line {} column {}".format(
            raw.iat[row, column], path, line, column + 1), path=path, line=line, column=column + 1)
    if not header:
        values.columns = ['x{}'.format(i + 1) for i in range(values.shape[1])]
    return values.astype(float)


def drop_rare_features(frame, min_count):
    """
    Remove columns with fewer than min_count nonzero entries

    :param frame: design frame
    :param min_count: threshold, 0 keeps everything
    :return: the reduced frame
    """
    logger = getLogger(__name__)
    if min_count <= 0:
        return frame
    counts = (frame != 0).sum(axis=0)
    rare = np.flatnonzero(counts.to_numpy() < min_count)
    if rare.size:
        logger.info("Dropping %d features seen fewer than %d times: %s", rare.size, min_count,
                    index_list_to_string(rare))
    return frame.loc[:, counts >= min_count]


def ingest_csv(design, response=None, header=False, response_column=None, min_feature_count=0, sigma2=None):
    """
    Build a dataset from CSV files

    The response is either a separate one-column CSV or a column of the
    design file.

    :param design: design CSV path
    :param response: response CSV path
    :param header: True when the files carry a header line
    :param response_column: name (with header) or 1-based position of the response in the design file
    :param min_feature_count: drop design columns with fewer nonzero entries than this
    :param sigma2: known noise variance
    :rtype: :class:`pyselinf.selection.dataset.Dataset`
    :raises ShapeMismatch: if the files disagree on the number of rows
    """
    # pylint: disable=too-many-arguments
    logger = getLogger(__name__)
    frame = read_numeric_csv(design, header=header)
    if (response is None) == (response_column is None):
        raise PyselinfConfigError("Give exactly one of a response file and a response column")
    if response_column is not None:
        column = response_column
        if column not in frame.columns:
            try:
                column = frame.columns[int(response_column) - 1]
            except (ValueError, IndexError):
                raise PyselinfConfigError("Response column '{}' not found in '{}'".format(response_column, design))
        Y = frame[column].to_numpy()
        frame = frame.drop(columns=[column])
    else:
        target = read_numeric_csv(response, header=header)
        if target.shape[1] != 1:
            raise ShapeMismatch("Response file '{}' has {} columns, expected 1".format(response, target.shape[1]))
        Y = target.iloc[:, 0].to_numpy()
        if Y.size != frame.shape[0]:
            raise ShapeMismatch("Design '{}' has {} rows but response '{}' has {}".format(
                design, frame.shape[0], response, Y.size))
    frame = drop_rare_features(frame, min_feature_count)
    if frame.shape[1] == 0:
        raise ShapeMismatch("No design columns left in '{}'".format(design))
    logger.info("Read %d observations of %d features from %s", frame.shape[0], frame.shape[1], design)
    return Dataset(X=frame.to_numpy(dtype=float), Y=np.asarray(Y, dtype=float), sigma2=sigma2)
