"""
Gaussian special functions

Thin vectorised wrappers around :mod:`scipy.special` plus the bivariate
normal probability and the closed-form one-dimensional integrals used by the
SOV estimators.
"""
import numpy as np
from scipy import special

# Correlations closer to +-1 than this are treated as degenerate
RHO_DEGENERATE_TOL = 1e-12
# Standardised truncation points above this use the asymptotic variance series
ASYMPTOTIC_TRUNCATION = 100.0


def norm_cdf(x):
    """
    Standard normal distribution function

    :param x: scalar or array
    :return: Phi(x), same shape as x
    """
    return special.ndtr(x)


def norm_sf(x):
    """
    Standard normal survival function 1 - Phi(x) without cancellation

    :param x: scalar or array
    """
    return special.ndtr(-np.asarray(x, dtype=float))


def log_norm_sf(x):
    """
    Logarithm of 1 - Phi(x), accurate far into the upper tail

    :param x: scalar or array
    """
    return special.log_ndtr(-np.asarray(x, dtype=float))


def norm_inv_cdf(p):
    """
    Standard normal quantile function

    :param p: probability or array of probabilities in the open interval (0, 1)
    :return: Phi^-1(p)
    :raises ValueError: if any entry lies outside (0, 1)
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
        raise ValueError("Normal quantile requires probabilities in (0, 1)")
    return special.ndtri(p)


def owens_t(h, a):
    """
    Owen's T function T(h, a)

    :param h: scalar or array
    :param a: scalar or array
    """
    return special.owens_t(h, a)


def bvn_prob(x, y, rho):
    """
    Bivariate standard normal distribution function P(Z1 <= x, Z2 <= y)

    Evaluated through Owen's T function.  Arguments broadcast against each
    other; infinite limits and |rho| = 1 are handled exactly.

    :param x: upper limit of the first coordinate
    :param y: upper limit of the second coordinate
    :param rho: correlation in [-1, 1]
    :return: probability array (or float for scalar input)
    :raises ValueError: if |rho| > 1
    """
    h, k, r = np.broadcast_arrays(np.asarray(x, dtype=float),
                                  np.asarray(y, dtype=float),
                                  np.asarray(rho, dtype=float))
    if np.any(np.abs(r) > 1.0):
        raise ValueError("Correlation must lie in [-1, 1]")
    scalar = h.ndim == 0
    h = np.atleast_1d(h).astype(float)
    k = np.atleast_1d(k).astype(float)
    r = np.atleast_1d(r).astype(float)
    result = np.zeros(h.shape)

    finite = np.isfinite(h) & np.isfinite(k)
    degenerate = np.abs(r) > 1.0 - RHO_DEGENERATE_TOL
    regular = finite & ~degenerate

    # Infinite limits
    h_top = np.isposinf(h)
    k_top = np.isposinf(k)
    result = np.where(h_top & ~np.isneginf(k), norm_cdf(k), result)
    result = np.where(k_top & ~np.isneginf(h), norm_cdf(h), result)
    result = np.where(h_top & k_top, 1.0, result)

    # Perfect correlation
    deg = finite & degenerate
    if np.any(deg):
        positive = norm_cdf(np.minimum(h, k))
        negative = np.maximum(0.0, norm_cdf(h) + norm_cdf(k) - 1.0)
        result = np.where(deg & (r > 0), positive, result)
        result = np.where(deg & (r < 0), negative, result)

    if np.any(regular):
        hr = h[regular]
        kr = k[regular]
        rr = r[regular]
        result[regular] = _owen_bvn(hr, kr, rr)

    result = np.clip(result, 0.0, 1.0)
    if scalar:
        return float(result[0])
    return result


def _owen_bvn(h, k, r):
    # Owen (1956) reduction for finite limits and |r| < 1
    root = np.sqrt((1.0 - r) * (1.0 + r))
    both_zero = (h == 0.0) & (k == 0.0)
    with np.errstate(divide='ignore', invalid='ignore'):
        a_h = (k - r * h) / (h * root)
        a_k = (h - r * k) / (k * root)
        t_h = np.where(h == 0.0, 0.25 * np.sign(k), special.owens_t(h, np.where(h == 0.0, 0.0, a_h)))
        t_k = np.where(k == 0.0, 0.25 * np.sign(h), special.owens_t(k, np.where(k == 0.0, 0.0, a_k)))
    hk = h * k
    offset = np.where((hk > 0.0) | ((hk == 0.0) & (h + k >= 0.0)), 0.0, 0.5)
    value = 0.5 * (norm_cdf(h) + norm_cdf(k)) - t_h - t_k - offset
    sheppard = 0.25 + np.arcsin(r) / (2.0 * np.pi)
    return np.where(both_zero, sheppard, value)


def preintegrate_last(g, s, a):
    """
    Closed form of the integral of Phi(g z + s) phi(z) over z >= a

    Equals P(W <= s / sqrt(1 + g^2), -Z <= -a) for a standard bivariate pair
    with correlation g / sqrt(1 + g^2).  Arguments broadcast.

    :param g: slope
    :param s: intercept
    :param a: lower limit (may be -inf)
    """
    g = np.asarray(g, dtype=float)
    scale = np.sqrt(1.0 + g * g)
    return bvn_prob(np.asarray(s, dtype=float) / scale, -np.asarray(a, dtype=float), g / scale)


def trunc_norm_moments_1d(mu, var, lower):
    """
    Mean and variance of N(mu, var) truncated to [lower, inf)

    Uses the inverse Mills ratio computed in log space, and an asymptotic
    series for the variance when the truncation point is far in the tail.

    :param mu: mean of the untruncated law
    :param var: variance of the untruncated law, > 0
    :param lower: truncation point (may be -inf)
    :return: tuple (mean, variance)
    :raises ValueError: if var <= 0
    """
    if not var > 0.0:
        raise ValueError("Variance must be positive, got {}".format(var))
    if np.isneginf(lower):
        return float(mu), float(var)
    sd = np.sqrt(var)
    alpha = (lower - mu) / sd
    log_pdf = -0.5 * alpha * alpha - 0.5 * np.log(2.0 * np.pi)
    mills = np.exp(log_pdf - special.log_ndtr(-alpha))
    mean = mu + sd * mills
    if alpha > ASYMPTOTIC_TRUNCATION:
        t = 1.0 / (alpha * alpha)
        ratio = t - 6.0 * t * t + 50.0 * t ** 3
    else:
        ratio = 1.0 + alpha * mills - mills * mills
    return float(mean), float(var * max(ratio, 0.0))
