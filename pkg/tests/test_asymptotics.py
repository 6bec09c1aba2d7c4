import math

import mpmath
import numpy as np
import pytest

from dpdmeans.asymptotics import (
    AsymptoticParams,
    j_matrix,
    k_matrix,
    mu_variance_factor,
    sigma_variance_factor,
    sigma_w_beta,
)
from dpdmeans.errors import DomainError
from dpdmeans.mdpde import estimate_two_sample
from dpdmeans.simulate import rng_stream

# K_0.3(1) by direct 40-digit evaluation of its defining display.
K_BETA03 = (0.28468597058782956, 0.39630928022045918)


def _mp_score_moments(beta, sigma0):
    """Score covariance K and Hessian J of one normal sample by 40-digit quadrature."""
    mpmath.mp.dps = 40
    b, s = mpmath.mpf(beta), mpmath.mpf(sigma0)

    def f(x):
        return mpmath.npdf(x, 0, s)

    u_mu = lambda x: x / s**2
    u_s = lambda x: (x * x - s * s) / s**3
    xi_mu = 0
    xi_s = mpmath.quad(lambda x: u_s(x) * f(x) ** (1 + b), [-mpmath.inf, mpmath.inf])
    k11 = mpmath.quad(lambda x: u_mu(x) ** 2 * f(x) ** (1 + 2 * b), [-mpmath.inf, mpmath.inf]) - xi_mu**2
    k22 = mpmath.quad(lambda x: u_s(x) ** 2 * f(x) ** (1 + 2 * b), [-mpmath.inf, mpmath.inf]) - xi_s**2
    j11 = mpmath.quad(lambda x: u_mu(x) ** 2 * f(x) ** (1 + b), [-mpmath.inf, mpmath.inf])
    j22 = mpmath.quad(lambda x: u_s(x) ** 2 * f(x) ** (1 + b), [-mpmath.inf, mpmath.inf])
    return [float(v) for v in (k11, k22, j11, j22)]


class TestJ:
    def test_beta_zero(self):
        np.testing.assert_allclose(j_matrix(1.0, 0.0), np.diag([1.0, 2.0]), rtol=1e-15)

    def test_scale(self):
        np.testing.assert_allclose(j_matrix(2.0, 0.0), np.diag([0.25, 0.5]), rtol=1e-15)

    def test_beta_half(self):
        pref = 1.0 / (math.sqrt(1.5) * (2 * math.pi) ** 0.25)
        np.testing.assert_allclose(j_matrix(1.0, 0.5), pref * np.diag([2 / 3, 2.25 / 2.25]), rtol=1e-14)

    @pytest.mark.parametrize("beta,sigma0", [(0.3, 1.0), (0.7, 2.5)])
    def test_quadrature(self, beta, sigma0):
        _, _, j11, j22 = _mp_score_moments(beta, sigma0)
        np.testing.assert_allclose(np.diag(j_matrix(sigma0, beta)), [j11, j22], rtol=1e-12)


class TestK:
    def test_beta_zero(self):
        np.testing.assert_allclose(k_matrix(1.0, 0.0), np.diag([1.0, 2.0]), rtol=1e-15)

    def test_beta_03(self):
        np.testing.assert_allclose(np.diag(k_matrix(1.0, 0.3)), K_BETA03, rtol=1e-14)

    @pytest.mark.parametrize("beta,sigma0", [(0.3, 1.0), (0.7, 2.5)])
    def test_quadrature(self, beta, sigma0):
        k11, k22, _, _ = _mp_score_moments(beta, sigma0)
        np.testing.assert_allclose(np.diag(k_matrix(sigma0, beta)), [k11, k22], rtol=1e-12)

    def test_off_diagonal_zero(self):
        k = k_matrix(1.3, 0.4)
        assert k[0, 1] == 0.0 and k[1, 0] == 0.0


class TestSigmaWBeta:
    def test_half(self):
        np.testing.assert_allclose(sigma_w_beta(AsymptoticParams(0.5, 1.0, 0.0)), np.diag([0.5, 0.5, 0.125]), rtol=1e-15)

    def test_w06(self):
        np.testing.assert_allclose(sigma_w_beta(AsymptoticParams(0.6, 1.0, 0.0)), np.diag([0.4, 0.6, 0.12]), rtol=1e-15)

    @pytest.mark.parametrize("w", [0.2, 0.6])
    @pytest.mark.parametrize("beta", [0.0, 0.1, 0.5, 1.0])
    @pytest.mark.parametrize("sigma0", [0.5, 2.0])
    def test_sandwich_assembly(self, w, beta, sigma0):
        k, j = np.diag(k_matrix(sigma0, beta)), np.diag(j_matrix(sigma0, beta))
        kj = k / j**2
        expected = np.diag([(1 - w) * kj[0], w * kj[0], w * (1 - w) * kj[1]])
        np.testing.assert_allclose(sigma_w_beta(AsymptoticParams(w, sigma0, beta)), expected, rtol=1e-12)

    def test_positive_diagonal(self):
        for w in (0.01, 0.5, 0.99):
            for beta in np.linspace(0, 1, 11):
                for s in (1e-3, 1.0, 1e3):
                    m = sigma_w_beta(AsymptoticParams(w, s, beta))
                    assert np.all(np.diag(m) > 0)
                    assert np.count_nonzero(m - np.diag(np.diag(m))) == 0

    @pytest.mark.parametrize("w", [0.0, 1.0, 1.5])
    def test_rejects_w(self, w):
        with pytest.raises(DomainError):
            AsymptoticParams(w, 1.0, 0.1)


class TestFactors:
    def test_mu_zero(self):
        assert mu_variance_factor(0.0) == 1.0

    def test_mu_one(self):
        assert mu_variance_factor(1.0) == pytest.approx(8 / 3**1.5, rel=1e-15)

    def test_monotone(self):
        v = [mu_variance_factor(b) for b in np.linspace(0, 1, 101)]
        assert all(a < b for a, b in zip(v, v[1:]))

    def test_sigma_zero(self):
        assert sigma_variance_factor(0.0) == pytest.approx(0.5, rel=1e-15)


@pytest.mark.slow
@pytest.mark.parametrize("beta", [0.0, 0.25, 0.5])
def test_monte_carlo_covariance_equal_sizes(beta):
    n, reps = 1000, 2000
    est = np.empty((reps, 3))
    for r in range(reps):
        x = rng_stream(101, r, 0, n).normal(0, 1, n)
        y = rng_stream(101, r, 1, n).normal(0, 1, n)
        e = estimate_two_sample(x, y, beta)
        est[r] = e.mu1, e.mu2, e.sigma - 1.0
    scaled = math.sqrt(n / 2) * est
    ratio = np.diag(np.cov(scaled.T)) / np.diag(sigma_w_beta(AsymptoticParams(0.5, 1.0, beta)))
    np.testing.assert_allclose(ratio, 1.0, atol=0.15)
