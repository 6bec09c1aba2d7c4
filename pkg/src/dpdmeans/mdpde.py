"""Minimum density power divergence estimation for normal samples.

For a normal model the empirical DPD objective of one sample is::

    h(mu, sigma) = (2 pi)^(-beta/2) sigma^(-beta)
                   * ((1+beta)^(-3/2) - 1/(n beta) sum exp(-beta z_i^2 / 2))

with ``z_i = (x_i - mu) / sigma``, and the negative mean log-likelihood at
``beta = 0``.  Two samples sharing a common scale are fitted by minimizing
the size-weighted average of their one-sample objectives.

The estimators are located by Newton's method on ``(mu_1, ..., mu_k,
log sigma)`` with analytic derivatives, Armijo step halving and a floor on
sigma.  Convergence is judged on the scale-free estimating equations
``mean(e_i z_i)`` and ``beta a - mean(e_i) + mean(e_i z_i^2)`` (weighted
across samples), where ``e_i = exp(-beta z_i^2 / 2)`` and
``a = (1+beta)^(-3/2)``.  These equal the raw gradient multiplied by
``sigma^(beta+1) (2 pi)^(beta/2)``, so the tolerance means the same thing
for data in any units.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "Sample",
    "SolverConfig",
    "TwoSampleEstimate",
    "OneSampleEstimate",
    "as_sample",
    "objective_one_sample",
    "objective_two_sample",
    "objective_gradient",
    "estimating_equations",
    "estimate_one_sample",
    "estimate_two_sample",
]

_LOG_2PI = math.log(2.0 * math.pi)
_MAD_TO_SD = 1.4826


@dataclass(frozen=True, eq=False)
class Sample:
    """Observations from one population.

    ``values`` is stored as a read-only float array.  A sample needs at least
    two finite observations and a positive standard deviation.
    """

    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < 2:
            raise DomainError(f"sample {self.label!r} needs at least 2 observations, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise DomainError(f"sample {self.label!r} contains non-finite values")
        if not np.ptp(v) > 0:
            raise DomainError(f"sample {self.label!r} has zero variance")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.values, other.values)

    __hash__ = None


def as_sample(data, label=""):
    """Coerce a :class:`Sample` or a sequence of numbers into a :class:`Sample`."""
    if isinstance(data, Sample):
        return data
    return Sample(np.asarray(data, dtype=float), label)


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the Newton solver.

    ``sigma_floor`` is in data units; ``None`` means ``1e-8`` times the
    pooled standard deviation of the data.
    """

    tolerance: float = 1e-10
    max_iterations: int = 200
    sigma_floor: float | None = None
    multistart: bool = True

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if self.sigma_floor is not None and not self.sigma_floor > 0:
            raise DomainError(f"sigma_floor must be positive, got {self.sigma_floor}")


@dataclass(frozen=True)
class TwoSampleEstimate:
    mu1: float
    mu2: float
    sigma: float
    beta: float
    objective: float
    iterations: int
    converged: bool
    gradient_norm: float
    start: str = "closed-form"

    @property
    def eta(self):
        return np.array([self.mu1, self.mu2, self.sigma])


@dataclass(frozen=True)
class OneSampleEstimate:
    mu: float
    sigma: float
    beta: float
    objective: float
    iterations: int
    converged: bool
    gradient_norm: float
    start: str = "closed-form"


def _check_beta(beta):
    beta = float(beta)
    if not (math.isfinite(beta) and 0.0 <= beta <= 1.0):
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    return beta


def _check_sigma(sigma):
    sigma = float(sigma)
    if not (math.isfinite(sigma) and sigma > 0):
        raise DomainError(f"sigma must be positive and finite, got {sigma}")
    return sigma


# ---------------------------------------------------------------------------
# objective and derivatives
# ---------------------------------------------------------------------------

def _moments(values, mu, sigma, beta, order=2):
    """Means of ``e z^k`` for k = 0..order, with ``e = exp(-beta z^2 / 2)``."""
    z = (values - mu) / sigma
    z2 = z * z
    e = np.exp(-0.5 * beta * z2) if beta > 0 else np.ones_like(z)
    ez = e * z
    out = [e.mean(), ez.mean(), (ez * z).mean()]
    if order >= 3:
        ez3 = ez * z2
        out += [ez3.mean(), (ez3 * z).mean()]
    return out


def _one_objective(values, mu, sigma, beta):
    if beta == 0.0:
        z = (values - mu) / sigma
        return math.log(sigma) + 0.5 * _LOG_2PI + 0.5 * float(np.mean(z * z))
    s0 = float(_moments(values, mu, sigma, beta, order=0)[0])
    scale = math.exp(-beta * (0.5 * _LOG_2PI + math.log(sigma)))
    return scale * ((1.0 + beta) ** -1.5 - s0 / beta)


def objective_one_sample(s, mu, sigma, beta):
    """Empirical DPD objective ``h_{n,beta}(mu, sigma)`` of one sample.

    At ``beta = 0`` this is the negative mean log-likelihood.
    """
    s = as_sample(s)
    return _one_objective(s.values, float(mu), _check_sigma(sigma), _check_beta(beta))


def objective_two_sample(x, y, mu1, mu2, sigma, beta):
    """Size-weighted average of the one-sample objectives with common sigma."""
    x, y = as_sample(x), as_sample(y)
    sigma, beta = _check_sigma(sigma), _check_beta(beta)
    n1, n2 = len(x), len(y)
    h1 = _one_objective(x.values, float(mu1), sigma, beta)
    h2 = _one_objective(y.values, float(mu2), sigma, beta)
    return (n1 * h1 + n2 * h2) / (n1 + n2)


def _equations(groups, weights, mus, sigma, beta):
    """Scale-free estimating equations and the blocks needed for the Hessian."""
    a = (1.0 + beta) ** -1.5
    k = len(groups)
    eq = np.zeros(k + 1)
    h_mm = np.zeros(k)
    h_ms = np.zeros(k)
    h_ss = 0.0
    for j, (v, w, mu) in enumerate(zip(groups, weights, mus)):
        s0, s1, s2, s3, s4 = _moments(v, mu, sigma, beta, order=3)
        q = beta * a - s0 + s2
        eq[j] = w * s1
        eq[k] += w * q
        # Second derivatives in (mu, sigma), divided by c sigma^(-beta-2).
        h_mm[j] = w * (s0 - beta * s2)
        h_ms[j] = w * ((beta + 2.0) * s1 - beta * s3)
        h_ss += w * ((beta + 1.0) * q - beta * s4 + (beta + 2.0) * s2)
    return eq, h_mm, h_ms, h_ss


def estimating_equations(x, y, mu1, mu2, sigma, beta):
    """Scale-free estimating equations of the two-sample fit.

    Returns ``(mean_x(e z), mean_y(e z), pooled sigma equation)`` weighted by
    the sample fractions; all three vanish at a stationary point.
    """
    x, y = as_sample(x), as_sample(y)
    n1, n2 = len(x), len(y)
    w = (n1 / (n1 + n2), n2 / (n1 + n2))
    eq, *_ = _equations((x.values, y.values), w, (float(mu1), float(mu2)),
                        _check_sigma(sigma), _check_beta(beta))
    return eq


def objective_gradient(x, y, mu1, mu2, sigma, beta):
    """Analytic gradient of :func:`objective_two_sample` in ``(mu1, mu2, sigma)``.

    The ``mu1`` component depends on ``x`` only and the ``mu2`` component on
    ``y`` only.
    """
    sigma, beta = _check_sigma(sigma), _check_beta(beta)
    eq = estimating_equations(x, y, mu1, mu2, sigma, beta)
    c = math.exp(-beta * (0.5 * _LOG_2PI + math.log(sigma)))
    return -c / sigma * eq


# ---------------------------------------------------------------------------
# Newton solver
# ---------------------------------------------------------------------------

@dataclass
class _Fit:
    mus: np.ndarray
    sigma: float
    iterations: int
    converged: bool
    gradient_norm: float
    objective: float = field(default=math.nan)


def _total_objective(groups, weights, mus, sigma, beta):
    return sum(w * _one_objective(v, mu, sigma, beta) for v, w, mu in zip(groups, weights, mus))


def _newton(groups, weights, mus0, sigma0, beta, cfg, floor):
    """Minimize the weighted objective from one start on standardized data."""
    k = len(groups)
    theta = np.append(np.asarray(mus0, dtype=float), math.log(sigma0))
    log_floor = math.log(floor)
    theta[k] = max(theta[k], log_floor)

    def f(th):
        return _total_objective(groups, weights, th[:k], math.exp(th[k]), beta)

    fval = f(theta)
    gnorm = math.inf
    for it in range(cfg.max_iterations + 1):
        sigma = math.exp(theta[k])
        eq, h_mm, h_ms, h_ss = _equations(groups, weights, theta[:k], sigma, beta)
        gnorm = float(np.max(np.abs(eq)))
        if gnorm < cfg.tolerance:
            return _Fit(theta[:k].copy(), sigma, it, True, gnorm, fval)
        if it == cfg.max_iterations:
            break
        # Gradient and Hessian in (mu, log sigma), with c sigma^(-beta) factored out.
        grad = np.empty(k + 1)
        grad[:k] = -eq[:k] / sigma
        grad[k] = -eq[k]
        hess = np.zeros((k + 1, k + 1))
        hess[np.arange(k), np.arange(k)] = h_mm / sigma**2
        hess[:k, k] = hess[k, :k] = h_ms / sigma
        hess[k, k] = h_ss + grad[k]
        # The factored form drops a positive constant from every entry, so
        # both the Newton direction and the descent test are unaffected.
        evals, evecs = np.linalg.eigh(hess)
        shift = 1e-8 * max(1.0, float(np.max(np.abs(evals))))
        evals = np.maximum(np.abs(evals), shift)
        step = -evecs @ ((evecs.T @ grad) / evals)
        slope = float(grad @ step) * math.exp(-beta * (0.5 * _LOG_2PI + theta[k]))

        t = 1.0
        accepted = False
        for _ in range(60):
            trial = theta + t * step
            trial[k] = max(trial[k], log_floor)
            ftrial = f(trial)
            if ftrial <= fval + 1e-4 * t * slope or (
                t == 1.0 and ftrial <= fval + 8 * np.finfo(float).eps * abs(fval)
            ):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        theta, fval = trial, ftrial

    sigma = math.exp(theta[k])
    eq, *_ = _equations(groups, weights, theta[:k], sigma, beta)
    gnorm = float(np.max(np.abs(eq)))
    return _Fit(theta[:k].copy(), sigma, it, gnorm < cfg.tolerance, gnorm, fval)


def _fit_groups(groups, beta, cfg):
    """Shared driver: standardize, run the start points, back-transform."""
    n = np.array([g.size for g in groups], dtype=float)
    weights = n / n.sum()
    means = np.array([g.mean() for g in groups])
    ss = sum(float(np.sum((g - m) ** 2)) for g, m in zip(groups, means))
    pooled = math.sqrt(ss / n.sum())
    if not pooled > 0:
        raise DomainError("pooled variance is zero")
    center = float(np.dot(weights, means))
    std = [(g - center) / pooled for g in groups]
    floor = (cfg.sigma_floor / pooled) if cfg.sigma_floor is not None else 1e-8

    starts = [("mean", (means - center) / pooled, 1.0)]
    medians = np.array([np.median(g) for g in std])
    mad = float(np.median(np.concatenate([np.abs(g - m) for g, m in zip(std, medians)])))
    if mad > 0:
        robust = ("median", medians, _MAD_TO_SD * mad)
        starts = starts + [robust] if cfg.multistart else [robust]

    fits = []
    for name, mus0, sig0 in starts:
        fit = _newton(std, weights, mus0, sig0, beta, cfg, floor)
        fits.append((name, fit))
    # Converged fits beat unconverged ones; then lowest objective wins.
    name, best = min(fits, key=lambda nf: (not nf[1].converged, nf[1].objective))
    mus = center + pooled * best.mus
    return name, mus, pooled * best.sigma, best


def estimate_two_sample(x, y, beta, cfg=None):
    """Minimum DPD estimate of ``(mu1, mu2, sigma)`` for two normal samples.

    At ``beta = 0`` the closed-form maximum likelihood solution is returned
    without iterating: the two sample means and
    ``sigma0 = sqrt(((n1-1) S1^2 + (n2-1) S2^2) / (n1 + n2))``.

    For ``beta > 0`` Newton's method is started from the classical estimates
    and, when ``cfg.multistart`` is set, also from the medians with a pooled
    MAD scale; the converged start with the lowest objective is kept.  A
    failure to converge is reported through ``converged=False``.
    """
    cfg = cfg or SolverConfig()
    beta = _check_beta(beta)
    x, y = as_sample(x, "x"), as_sample(y, "y")
    xv, yv = x.values, y.values
    if beta == 0.0:
        m1, m2 = float(xv.mean()), float(yv.mean())
        ss = float(np.sum((xv - m1) ** 2) + np.sum((yv - m2) ** 2))
        sigma = math.sqrt(ss / (xv.size + yv.size))
        gnorm = float(np.max(np.abs(estimating_equations(x, y, m1, m2, sigma, 0.0))))
        obj = objective_two_sample(x, y, m1, m2, sigma, 0.0)
        return TwoSampleEstimate(m1, m2, sigma, 0.0, obj, 0, True, gnorm)

    start, mus, sigma, fit = _fit_groups((xv, yv), beta, cfg)
    m1, m2 = float(mus[0]), float(mus[1])
    gnorm = float(np.max(np.abs(estimating_equations(x, y, m1, m2, sigma, beta))))
    obj = objective_two_sample(x, y, m1, m2, sigma, beta)
    return TwoSampleEstimate(m1, m2, sigma, beta, obj, fit.iterations, fit.converged, gnorm, start)


def estimate_one_sample(s, beta, cfg=None):
    """Minimum DPD estimate of ``(mu, sigma)`` for a single normal sample.

    ``beta = 0`` gives the mean and the maximum likelihood standard deviation
    ``sqrt(sum (x - mean)^2 / n)``.
    """
    cfg = cfg or SolverConfig()
    beta = _check_beta(beta)
    s = as_sample(s)
    v = s.values
    if beta == 0.0:
        mu = float(v.mean())
        sigma = float(np.sqrt(np.mean((v - mu) ** 2)))
        eq, *_ = _equations((v,), (1.0,), (mu,), sigma, 0.0)
        return OneSampleEstimate(mu, sigma, 0.0, _one_objective(v, mu, sigma, 0.0), 0, True,
                                 float(np.max(np.abs(eq))))
    start, mus, sigma, fit = _fit_groups((v,), beta, cfg)
    mu = float(mus[0])
    eq, *_ = _equations((v,), (1.0,), (mu,), sigma, beta)
    return OneSampleEstimate(mu, sigma, beta, _one_objective(v, mu, sigma, beta), fit.iterations,
                             fit.converged, float(np.max(np.abs(eq))), start)
