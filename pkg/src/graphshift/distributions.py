"""Central and noncentral F distributions, power, and shift-increase curves."""

from __future__ import annotations

import warnings

import numpy as np
from scipy import special, stats

NCF_TAIL = 1e-12
NCF_MAX_TERMS = 10_000


def _check_df(d1, d2):
    if not (d1 >= 1 and d2 >= 1):
        raise ValueError(f"degrees of freedom must be >= 1, got ({d1}, {d2})")


def _beta_args(x, d1, d2):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("F quantiles must be nonnegative")
    # y = d1 x / (d1 x + d2) and 1 - y, computed separately to keep tail precision
    with np.errstate(invalid="ignore"):
        y = np.where(np.isinf(x), 1.0, d1 * x / (d1 * x + d2))
        ybar = np.where(np.isinf(x), 0.0, d2 / (d1 * x + d2))
    return y, ybar


def _beta_tail(a, b, y, ybar, upper):
    """``I_y(a, b)`` (or its complement), always evaluated at the smaller of ``y`` and ``1 - y``."""
    small = y <= 0.5
    with np.errstate(invalid="ignore"):
        if upper:
            return np.where(small, special.betaincc(a, b, y), special.betainc(b, a, ybar))
        return np.where(small, special.betainc(a, b, y), special.betaincc(b, a, ybar))


def f_cdf(x, d1, d2):
    """CDF of the central F(d1, d2) distribution via the regularized incomplete beta."""
    _check_df(d1, d2)
    y, ybar = _beta_args(x, d1, d2)
    out = _beta_tail(d1 / 2.0, d2 / 2.0, y, ybar, upper=False)
    return out if out.ndim else float(out)


def f_sf(x, d1, d2):
    """Upper tail ``1 - f_cdf``, evaluated without cancellation."""
    _check_df(d1, d2)
    y, ybar = _beta_args(x, d1, d2)
    out = _beta_tail(d1 / 2.0, d2 / 2.0, y, ybar, upper=True)
    return out if out.ndim else float(out)


def f_isf(alpha, d1, d2) -> float:
    """Upper ``alpha`` quantile of F(d1, d2).

    Both beta tails are inverted separately, so tiny ``alpha`` keeps full
    relative precision.
    """
    _check_df(d1, d2)
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    ybar = special.betaincinv(d2 / 2.0, d1 / 2.0, alpha)
    y = special.betainccinv(d1 / 2.0, d2 / 2.0, alpha)
    return float(d2 * y / (d1 * ybar))


def _poisson_window(mu: float) -> np.ndarray:
    if mu == 0:
        return np.zeros(1, dtype=int)
    lo = int(stats.poisson.ppf(NCF_TAIL / 4, mu))
    hi = int(stats.poisson.isf(NCF_TAIL / 4, mu)) + 1
    if hi - lo + 1 > NCF_MAX_TERMS:
        warnings.warn(
            f"noncentral F series truncated to {NCF_MAX_TERMS} terms (ncp={2 * mu:.3g})",
            RuntimeWarning,
            stacklevel=3,
        )
        mode = int(mu)
        lo = max(0, mode - NCF_MAX_TERMS // 2)
        hi = lo + NCF_MAX_TERMS - 1
    return np.arange(lo, hi + 1)


def _ncf_series(x, d1, d2, ncp, upper):
    _check_df(d1, d2)
    if ncp < 0:
        raise ValueError(f"noncentrality must be nonnegative, got {ncp}")
    y, ybar = _beta_args(x, d1, d2)
    mu = ncp / 2.0
    j = _poisson_window(mu)
    w = stats.poisson.pmf(j, mu) if mu > 0 else np.ones(1)
    a = d1 / 2.0 + j
    b = d2 / 2.0
    shape = y.shape
    y = y.reshape(-1, 1)
    ybar = ybar.reshape(-1, 1)
    terms = _beta_tail(a[None, :], b, y, ybar, upper)
    out = (terms * w[None, :]).sum(axis=1).reshape(shape)
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def noncentral_f_cdf(x, d1, d2, ncp):
    """CDF of the noncentral F distribution.

    Poisson(ncp / 2) mixture of incomplete beta functions; the series is
    summed over a window around the Poisson mode whose omitted mass is below
    ``NCF_TAIL`` (at most ``NCF_MAX_TERMS`` terms).
    """
    return _ncf_series(x, d1, d2, ncp, upper=False)


def noncentral_f_sf(x, d1, d2, ncp):
    return _ncf_series(x, d1, d2, ncp, upper=True)


def noncentrality(n1: int, n2: int, delta2: float) -> float:
    return n1 * n2 / (n1 + n2) * delta2


def power(alpha: float, k: int, n1: int, n2: int, delta2: float) -> float:
    """Power of the level-``alpha`` Hotelling test in ``k`` dimensions.

    ``delta2`` is the distribution shift (squared Mahalanobis norm of the true
    mean difference in the tested coordinates).
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if delta2 < 0:
        raise ValueError("delta2 must be nonnegative")
    d2 = n1 + n2 - k - 1
    _check_df(k, d2)
    crit = f_isf(alpha, k, d2)
    return float(noncentral_f_sf(crit, k, d2, noncentrality(n1, n2, delta2)))


def shift_increase(
    alpha: float,
    k: int,
    l: int,
    delta2_k: float,
    n1: int,
    n2: int,
    tol: float = 1e-10,
    max_expand: int = 200,
) -> float:
    """Extra distribution shift needed to keep the same power after adding ``l`` dimensions.

    Solves ``power(alpha, k + l, delta2) = power(alpha, k, delta2_k)`` for
    ``delta2`` by bisection and returns ``delta2 - delta2_k``.
    """
    if l < 0:
        raise ValueError("l must be nonnegative")
    if l == 0 or delta2_k == 0:
        return 0.0
    target = power(alpha, k, n1, n2, delta2_k)

    def gap(d):
        return power(alpha, k + l, n1, n2, d) - target

    lo, hi = delta2_k, 2.0 * delta2_k
    for _ in range(max_expand):
        if gap(hi) >= 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise RuntimeError("could not bracket the shift-increase root")
    while hi - lo > 1e-14 * hi:
        mid = 0.5 * (lo + hi)
        g = gap(mid)
        if abs(g) < tol:
            lo = hi = mid
            break
        if g < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) - delta2_k
