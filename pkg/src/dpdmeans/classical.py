"""Classical two-sample comparison tests.

Pooled t, Yuen's trimmed t, Wilcoxon rank-sum and two-sample
Kolmogorov-Smirnov, all two-sided.  Rank-sum and KS use their large-sample
null approximations.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import special
from .errors import DomainError

__all__ = [
    "ClassicalTestResult",
    "pooled_t_test",
    "welch_t_test",
    "trimmed_t_test",
    "wilcoxon_test",
    "ks_test",
    "midranks",
]


@dataclass(frozen=True)
class ClassicalTestResult:
    statistic: float
    p_value: float
    method: str
    df: float | None = None
    all_tied: bool = False

    def as_dict(self):
        out = {"method": self.method, "statistic": self.statistic, "p_value": self.p_value}
        if self.df is not None:
            out["df"] = self.df
        if self.all_tied:
            out["all_tied"] = True
        return out


def _values(data, min_size=1):
    v = np.asarray(getattr(data, "values", data), dtype=float).ravel()
    if v.size < min_size:
        raise DomainError(f"need at least {min_size} observations, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise DomainError("sample contains non-finite values")
    return v


def pooled_t_test(x, y):
    """Equal-variance two-sample t test.

    ``t = |xbar - ybar| / (S_p sqrt(1/n1 + 1/n2))`` referred to the t
    distribution with ``n1 + n2 - 2`` degrees of freedom.
    """
    x, y = _values(x), _values(y)
    n1, n2 = x.size, y.size
    df = n1 + n2 - 2
    if df < 1:
        raise DomainError("pooled t test needs n1 + n2 >= 3")
    ss = float(np.sum((x - x.mean()) ** 2) + np.sum((y - y.mean()) ** 2))
    sp2 = ss / df
    if not sp2 > 0:
        raise DomainError("pooled variance is zero")
    t = abs(float(x.mean() - y.mean())) / math.sqrt(sp2 * (1.0 / n1 + 1.0 / n2))
    return ClassicalTestResult(t, special.t_two_sided_pvalue(t, df), "pooled_t", float(df))


def _yuen_parts(v, trim):
    n = v.size
    g = int(math.floor(trim * n))
    h = n - 2 * g
    if h < 2:
        raise DomainError(f"trimming {trim} leaves {h} of {n} observations; need at least 2")
    s = np.sort(v)
    tmean = float(s[g:n - g].mean())
    wins = s.copy()
    wins[:g] = s[g]
    wins[n - g:] = s[n - g - 1]
    wvar = float(np.var(wins, ddof=1))
    return tmean, (n - 1) * wvar / (h * (h - 1)), h


def trimmed_t_test(x, y, trim=0.2):
    """Yuen's trimmed-means t test with Winsorized variances.

    ``floor(trim * n)`` observations are removed from each tail of each
    sample.  ``trim = 0`` gives Welch's unequal-variance t test.
    """
    trim = float(trim)
    if not 0.0 <= trim < 0.5:
        raise DomainError(f"trim must lie in [0, 0.5), got {trim}")
    x, y = _values(x, 2), _values(y, 2)
    m1, d1, h1 = _yuen_parts(x, trim)
    m2, d2, h2 = _yuen_parts(y, trim)
    if not d1 + d2 > 0:
        raise DomainError("winsorized variances are both zero")
    t = abs(m1 - m2) / math.sqrt(d1 + d2)
    df = (d1 + d2) ** 2 / (d1 * d1 / (h1 - 1) + d2 * d2 / (h2 - 1))
    method = "trimmed_t" if trim > 0 else "welch_t"
    return ClassicalTestResult(t, special.t_two_sided_pvalue(t, df), method, df)


def welch_t_test(x, y):
    return trimmed_t_test(x, y, 0.0)


def midranks(values):
    """Ranks 1..n with ties sharing the average of their positions."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    sv = v[order]
    ranks = np.empty(v.size)
    # Boundaries of runs of equal values in sorted order.
    starts = np.flatnonzero(np.r_[True, sv[1:] != sv[:-1]])
    ends = np.r_[starts[1:], v.size]
    for a, b in zip(starts, ends):
        ranks[order[a:b]] = 0.5 * (a + 1 + b)
    return ranks


def wilcoxon_test(x, y):
    """Wilcoxon rank-sum test.

    The statistic is the rank sum of ``x`` in the pooled sample, using
    midranks for ties.  The two-sided p-value comes from the normal
    approximation with continuity correction and tie-corrected variance.
    If every observation is identical the p-value is 1 and ``all_tied`` is
    set.
    """
    x, y = _values(x), _values(y)
    n1, n2 = x.size, y.size
    n = n1 + n2
    ranks = midranks(np.concatenate([x, y]))
    w = float(ranks[:n1].sum())
    mean = n1 * (n + 1) / 2.0
    _, counts = np.unique(np.concatenate([x, y]), return_counts=True)
    tie_term = float(np.sum(counts**3 - counts))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return ClassicalTestResult(w, 1.0, "wilcoxon", all_tied=True)
    z = max(abs(w - mean) - 0.5, 0.0) / math.sqrt(var)
    p = min(1.0, special.erfc(z / math.sqrt(2.0)))
    return ClassicalTestResult(w, p, "wilcoxon")


def ks_test(x, y):
    """Two-sample Kolmogorov-Smirnov test with the limiting Kolmogorov p-value.

    ``D = sup |F1 - F2|``; the p-value is ``P(K > sqrt(n1 n2 / (n1 + n2)) D)``.
    """
    x, y = np.sort(_values(x)), np.sort(_values(y))
    n1, n2 = x.size, y.size
    grid = np.concatenate([x, y])
    f1 = np.searchsorted(x, grid, side="right") / n1
    f2 = np.searchsorted(y, grid, side="right") / n2
    d = float(np.max(np.abs(f1 - f2)))
    en = n1 * n2 / (n1 + n2)
    return ClassicalTestResult(d, special.kolmogorov_sf(math.sqrt(en) * d), "ks")
