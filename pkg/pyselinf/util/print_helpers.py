"""Generating string representations of arrays for log printouts"""
import numpy as np

# Longest vector printed in full
MAX_ITEMS = 8


def vector_to_string(values, precision=4):
    """
    :param values: sequence of numbers
    :param precision: significant digits per item
    :return: String representation of the vector, elided in the middle when long
    """
    values = np.ravel(np.asarray(values, dtype=float))
    items = ["{:.{}g}".format(v, precision) for v in values]
    if len(items) > MAX_ITEMS:
        half = MAX_ITEMS // 2
        items = items[:half] + ['...'] + items[-half:]
    return '[' + ', '.join(items) + ']'


def index_list_to_string(indices):
    """
    :param indices: sequence of integer indices
    :return: String representation of the indices, for example '{0, 3, 7}'
    """
    return '{' + ', '.join(str(int(i)) for i in indices) + '}'
