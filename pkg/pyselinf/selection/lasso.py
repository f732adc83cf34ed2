"""
Randomized lasso by cyclic coordinate descent, and tuning-parameter rules

The solver minimises

    (q/2) ||Y - X beta||^2 + lambda ||beta||_1 - omega^T beta

where q is a quadratic scale (q = 1/rho for the carving lasso on the
selection rows).  Penalties here are on that unnormalised scale; the
tuning rules return per-observation values which callers multiply by n.
"""
from logging import getLogger

import numpy as np

from ..pyselinf_errors import NoConvergence, PyselinfConfigError

DEFAULT_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 100000
# KKT violation accepted at convergence, relative to 1 + ||q X^T Y + omega||_inf
KKT_TOL = 1e-9
CV_GRID_POINTS = 50


def soft_threshold(x, lam):
    """Soft-thresholding operator sign(x) max(|x| - lam, 0)"""
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def kkt_violation(beta, grad, lam):
    """
    Largest violation of the lasso KKT conditions

    :param beta: coefficients
    :param grad: gradient of the smooth part at beta
    :param lam: penalty
    """
    active = beta != 0.0
    on_active = np.abs(grad[active] + lam * np.sign(beta[active]))
    off_active = np.abs(grad[~active]) - lam
    return float(max(np.max(on_active, initial=0.0), np.max(off_active, initial=0.0)))


def lasso_objective(data, lam, omega, beta, quad_scale=1.0):
    """
    Value of the randomized lasso objective

    :param data: dataset
    :param lam: penalty
    :param omega: randomization vector
    :param beta: coefficients
    :param quad_scale: scale of the quadratic loss
    """
    residual = data.Y - data.X @ beta
    return float(0.5 * quad_scale * residual @ residual + lam * np.abs(beta).sum() - omega @ beta)


def solve_randomized_lasso(data, lam, omega, quad_scale=1.0, beta0=None, tol=DEFAULT_TOL,
                           max_sweeps=DEFAULT_MAX_SWEEPS, callback=None):
    """
    Minimise the randomized lasso objective

    Full sweeps alternate with sweeps restricted to the active set; the solver
    stops when a full sweep moves no coefficient by more than
    tol * max(1, ||beta||_inf) and the KKT conditions hold.

    :param data: :class:`pyselinf.selection.dataset.Dataset`
    :param lam: penalty, > 0
    :param omega: randomization vector of length p
    :param quad_scale: scale of the quadratic loss
    :param beta0: optional warm start
    :param tol: coefficient change tolerance
    :param max_sweeps: sweep cap
    :param callback: called with a copy of the coefficients after every sweep
    :return: coefficient vector of length p
    :raises NoConvergence: if the sweep cap is reached
    """
    # pylint: disable=too-many-arguments, too-many-locals
    logger = getLogger(__name__)
    if not lam > 0:
        raise ValueError("Penalty must be positive, got {}".format(lam))
    omega = np.ravel(np.asarray(omega, dtype=float))
    if omega.size != data.p:
        raise PyselinfConfigError("Randomization has length {}, expected p = {}".format(omega.size, data.p))

    gram = quad_scale * (data.X.T @ data.X)
    linear = quad_scale * (data.X.T @ data.Y) + omega
    if np.max(np.abs(linear)) <= lam:
        return np.zeros(data.p)

    beta = np.zeros(data.p) if beta0 is None else np.array(beta0, dtype=float)
    grad = gram @ beta - linear
    diag = np.diag(gram).copy()

    def sweep(indices):
        largest = 0.0
        for j in indices:
            if diag[j] <= 0.0:
                new = 0.0
            else:
                new = soft_threshold(diag[j] * beta[j] - grad[j], lam) / diag[j]
            delta = new - beta[j]
            if delta != 0.0:
                grad[:] += gram[:, j] * delta
                beta[j] = new
                largest = max(largest, abs(delta))
        if callback is not None:
            callback(beta.copy())
        return largest

    everything = np.arange(data.p)
    kkt_tol = KKT_TOL * (1.0 + np.max(np.abs(linear)))
    sweeps = 0
    while sweeps < max_sweeps:
        change = sweep(everything)
        grad[:] = gram @ beta - linear
        sweeps += 1
        if change <= tol * max(1.0, np.max(np.abs(beta))) and kkt_violation(beta, grad, lam) <= kkt_tol:
            logger.debug("Lasso converged after %d sweeps, %d active", sweeps, np.count_nonzero(beta))
            return beta
        active = np.flatnonzero(beta)
        while sweeps < max_sweeps:
            change = sweep(active)
            sweeps += 1
            if change <= tol * max(1.0, np.max(np.abs(beta))):
                break

    msg = "Lasso did not converge within {} sweeps".format(max_sweeps)
    logger.error(msg)
    raise NoConvergence(msg)


def lambda_theory(p, n1):
    """
    Theoretical penalty sqrt(log(p) / n1) on the per-observation scale

    :param p: number of features
    :param n1: number of selection observations
    """
    return float(np.sqrt(np.log(p) / n1))


def lambda_grid(data, points=CV_GRID_POINTS):
    """
    Log-spaced grid spanning [0.01, 1] * ||X^T Y||_inf / n, in decreasing order

    :param data: selection dataset
    :param points: grid size
    """
    top = np.max(np.abs(data.X.T @ data.Y)) / data.n
    return np.geomspace(top, 0.01 * top, points)


def lambda_cv(data, folds=5, grid=None, seed=0):
    """
    Cross-validated penalty of the plain lasso on the per-observation scale

    Each fold fits the path on the remaining rows with warm starts, in
    decreasing penalty order; ties keep the larger penalty.

    :param data: selection dataset
    :param folds: number of folds, >= 2
    :param grid: candidate penalties, default :func:`lambda_grid`
    :param seed: fold assignment seed
    :return: chosen penalty
    """
    logger = getLogger(__name__)
    if int(folds) != folds or folds < 2:
        raise PyselinfConfigError("Cross-validation needs at least 2 folds, got {}".format(folds))
    grid = lambda_grid(data) if grid is None else np.sort(np.asarray(grid, dtype=float))[::-1]
    if grid.size == 1:
        return float(grid[0])
    order = np.random.default_rng(seed).permutation(data.n)
    errors = np.zeros(grid.size)
    for test_rows in np.array_split(order, int(folds)):
        train = data.subset(np.setdiff1d(order, test_rows))
        X_test = data.X[test_rows]
        Y_test = data.Y[test_rows]
        beta = None
        for i, lam in enumerate(grid):
            beta = solve_randomized_lasso(train, lam * train.n, np.zeros(data.p), beta0=beta)
            errors[i] += np.mean((Y_test - X_test @ beta) ** 2) / folds
    best = int(np.argmin(errors))
    logger.debug("Cross-validated penalty %.4g (grid index %d)", grid[best], best)
    return float(grid[best])
