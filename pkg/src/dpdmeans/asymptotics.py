"""Asymptotic covariance of the two-sample minimum DPD estimator.

With ``w`` the limiting share of the first sample, the scaled error
``sqrt(n1 n2 / (n1 + n2)) * (eta_hat - eta_0)`` of ``eta = (mu1, mu2, sigma)``
is asymptotically normal with the diagonal covariance returned by
:func:`sigma_w_beta`.  Its entries are the sandwich products ``K J^-2`` of the
one-sample score covariance ``K`` and Hessian limit ``J``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "AsymptoticParams",
    "j_matrix",
    "k_matrix",
    "mu_variance_factor",
    "sigma_variance_factor",
    "sigma_w_beta",
]

_LOG_2PI = math.log(2.0 * math.pi)


def _check(sigma0, beta):
    sigma0, beta = float(sigma0), float(beta)
    if not (math.isfinite(sigma0) and sigma0 > 0):
        raise DomainError(f"sigma0 must be positive and finite, got {sigma0}")
    if not (math.isfinite(beta) and beta >= 0):
        raise DomainError(f"beta must be non-negative, got {beta}")
    return sigma0, beta


@dataclass(frozen=True)
class AsymptoticParams:
    """Limiting sample share ``w``, true common scale and estimation tuning."""

    w: float
    sigma0: float
    beta: float

    def __post_init__(self):
        if not 0.0 < self.w < 1.0:
            raise DomainError(f"w must lie in (0, 1), got {self.w}")
        _check(self.sigma0, self.beta)


def j_matrix(sigma0, beta):
    """Limit of the one-sample objective Hessian, ``J_beta(sigma0)``."""
    sigma0, beta = _check(sigma0, beta)
    log_pref = -0.5 * math.log1p(beta) - 0.5 * beta * _LOG_2PI - (2.0 + beta) * math.log(sigma0)
    pref = math.exp(log_pref)
    return pref * np.diag([1.0 / (1.0 + beta), (beta * beta + 2.0) / (1.0 + beta) ** 2])


def k_matrix(sigma0, beta):
    """Covariance of the scaled one-sample score, ``K_beta(sigma0)``."""
    sigma0, beta = _check(sigma0, beta)
    pref = math.exp(-(2.0 + 2.0 * beta) * math.log(sigma0) - beta * _LOG_2PI)
    r = (1.0 + 2.0 * beta) ** -1.5
    k11 = r
    k22 = r * (4.0 * beta * beta + 2.0) / (1.0 + 2.0 * beta) - beta * beta / (1.0 + beta) ** 3
    return pref * np.diag([k11, k22])


def mu_variance_factor(beta):
    """Efficiency-loss factor of the location estimate, ``(1+beta)^3 (1+2 beta)^(-3/2)``."""
    _, beta = _check(1.0, beta)
    return (1.0 + beta) ** 3 * (1.0 + 2.0 * beta) ** -1.5


def sigma_variance_factor(beta):
    """Scale counterpart of :func:`mu_variance_factor` (``K22 / J22^2`` at unit scale)."""
    _, beta = _check(1.0, beta)
    b2 = beta * beta
    return (1.0 + beta) ** 5 / (b2 + 2.0) ** 2 * (
        (4.0 * b2 + 2.0) / (1.0 + 2.0 * beta) ** 2.5 - b2 / (1.0 + beta) ** 3
    )


def sigma_w_beta(p):
    """Asymptotic covariance ``Sigma_{w,beta}(sigma0)`` of the scaled estimator.

    Parameters
    ----------
    p : AsymptoticParams

    Returns
    -------
    numpy.ndarray
        Diagonal 3x3 matrix with entries ``sigma0^2 (1-w) v_mu``,
        ``sigma0^2 w v_mu`` and ``sigma0^2 w (1-w) v_sigma``.
    """
    s2 = p.sigma0 ** 2
    v_mu = mu_variance_factor(p.beta)
    v_sigma = sigma_variance_factor(p.beta)
    return np.diag([s2 * (1.0 - p.w) * v_mu, s2 * p.w * v_mu, s2 * p.w * (1.0 - p.w) * v_sigma])
