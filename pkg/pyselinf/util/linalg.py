"""
Dense symmetric positive-definite helpers built on :mod:`scipy.linalg`
"""
from logging import getLogger

import numpy as np
from scipy import linalg

from ..pyselinf_errors import NotPositiveDefinite, ShapeMismatch

SYMMETRY_RTOL = 1e-10


def as_sym_matrix(S, name="matrix"):
    """
    Validate a square symmetric matrix and return it as a float array

    Entries are symmetrised to remove round-off asymmetry.

    :param S: square array
    :param name: name used in error messages
    :raises ShapeMismatch: if S is not square
    :raises ValueError: if S is not symmetric within relative tolerance
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ShapeMismatch("{} must be square, got shape {}".format(name, S.shape))
    scale = max(np.max(np.abs(S)), 1.0) if S.size else 1.0
    if np.max(np.abs(S - S.T), initial=0.0) > SYMMETRY_RTOL * scale:
        raise ValueError("{} is not symmetric".format(name))
    return 0.5 * (S + S.T)


def cholesky(S):
    """
    Lower Cholesky factor L with L L^T = S

    A pivot is rejected when it falls below d * eps * max(diag(S)).

    :param S: symmetric positive-definite matrix
    :return: lower-triangular factor
    :raises NotPositiveDefinite: if the factorisation fails or a pivot is too small
    """
    logger = getLogger(__name__)
    S = as_sym_matrix(S)
    dim = S.shape[0]
    if dim == 0:
        return np.zeros((0, 0))
    try:
        factor = linalg.cholesky(S, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as err:
        logger.debug("Cholesky failed: %s", err)
        raise NotPositiveDefinite("Matrix is not positive-definite: {}".format(err))
    floor = dim * np.finfo(float).eps * np.max(np.diag(S))
    if np.min(np.diag(factor)) ** 2 <= floor:
        raise NotPositiveDefinite("Cholesky pivot below tolerance {:.3g}".format(floor))
    return factor


def solve_pd(S, rhs):
    """
    Solve S x = rhs for symmetric positive-definite S

    :param S: symmetric positive-definite matrix
    :param rhs: vector or matrix right-hand side
    """
    factor = cholesky(S)
    return linalg.cho_solve((factor, True), np.asarray(rhs, dtype=float))


def inv_pd(S):
    """
    Inverse of a symmetric positive-definite matrix, symmetrised

    :param S: symmetric positive-definite matrix
    """
    S = np.asarray(S, dtype=float)
    inverse = solve_pd(S, np.eye(S.shape[0]))
    return 0.5 * (inverse + inverse.T)


def is_positive_definite(S):
    """
    Check positive-definiteness through a Cholesky attempt

    :param S: symmetric matrix
    :rtype: bool
    """
    try:
        cholesky(S)
    except NotPositiveDefinite:
        return False
    return True
