"""Special functions needed for normal, chi-square and t tail probabilities.

Thin wrappers around :mod:`scipy.special` that validate their domains and
return plain floats.
"""

import math

from scipy import special as _sp

from .errors import DomainError

__all__ = [
    "erfc",
    "std_normal_cdf",
    "std_normal_sf",
    "regularized_incomplete_beta",
    "chi2_1_sf",
    "chi2_1_isf",
    "t_two_sided_pvalue",
    "kolmogorov_sf",
]


def erfc(x):
    """Complementary error function."""
    x = float(x)
    if math.isnan(x):
        raise DomainError("erfc of NaN")
    return float(_sp.erfc(x))


def std_normal_cdf(x):
    x = float(x)
    if math.isnan(x):
        raise DomainError("std_normal_cdf of NaN")
    return float(_sp.ndtr(x))


def std_normal_sf(x):
    """Upper tail ``1 - Phi(x)`` without cancellation for large ``x``."""
    x = float(x)
    if math.isnan(x):
        raise DomainError("std_normal_sf of NaN")
    return float(_sp.ndtr(-x))


def regularized_incomplete_beta(a, b, x):
    """Regularized incomplete beta function ``I_x(a, b)``.

    Parameters
    ----------
    a, b : float
        Shape parameters, both strictly positive.
    x : float
        Upper integration limit in ``[0, 1]``.
    """
    a, b, x = float(a), float(b), float(x)
    if not (a > 0 and b > 0):
        raise DomainError(f"incomplete beta needs a > 0 and b > 0, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"incomplete beta needs 0 <= x <= 1, got x={x}")
    return float(_sp.betainc(a, b, x))


def chi2_1_sf(s):
    """Upper tail of the chi-square distribution with one degree of freedom.

    Uses ``P(chi2(1) > s) = erfc(sqrt(s / 2))``.
    """
    s = float(s)
    if math.isnan(s):
        raise DomainError("chi-square tail of NaN")
    if s <= 0.0:
        return 1.0
    return erfc(math.sqrt(0.5 * s))


def chi2_1_isf(alpha):
    """Critical value ``c`` with ``P(chi2(1) > c) = alpha``; ``alpha = 1`` gives 0."""
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return 0.0
    z = float(_sp.ndtri(1.0 - 0.5 * alpha))
    return z * z


def t_two_sided_pvalue(t, df):
    """Two-sided tail ``P(|T_df| > |t|)`` through the incomplete beta function."""
    t, df = float(t), float(df)
    if not df > 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    if math.isnan(t):
        raise DomainError("t statistic is NaN")
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t))


def kolmogorov_sf(x):
    """Limiting Kolmogorov distribution tail ``P(K > x)``."""
    x = float(x)
    if math.isnan(x):
        raise DomainError("Kolmogorov tail of NaN")
    if x <= 0.0:
        return 1.0
    return float(_sp.kolmogorov(x))
