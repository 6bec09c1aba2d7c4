import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpdmeans.asymptotics import AsymptoticParams, sigma_w_beta
from dpdmeans.divergence import dpd_normal_equal_sigma
from dpdmeans.dpdtest import (
    dpd_statistic,
    dpd_test,
    lambda_scaling,
    lrt_statistic,
    power_approx,
    sigma_gamma_sq,
    t_vector,
)
from dpdmeans.errors import ConvergenceError, DomainError
from dpdmeans.mdpde import SolverConfig
from dpdmeans.simulate import rng_stream

# lambda_{0.1,0.1}(1) at 30 digits with mpmath.
LAMBDA_01 = 0.880644952836041


class TestLambda:
    @pytest.mark.parametrize("sigma", [0.01, 1.0, 250.0])
    def test_unity_at_zero(self, sigma):
        assert lambda_scaling(sigma, 0.0, 0.0) == 1.0

    def test_value(self):
        assert lambda_scaling(1.0, 0.1, 0.1) == pytest.approx(LAMBDA_01, rel=1e-14)

    @pytest.mark.parametrize("beta,gamma", [(0.1, 0.1), (0.3, 0.8), (1.0, 0.5)])
    def test_sigma_dependence(self, beta, gamma):
        assert lambda_scaling(2.4, beta, gamma) == pytest.approx(2**-gamma * lambda_scaling(1.2, beta, gamma), rel=1e-14)

    def test_rejects_sigma(self):
        with pytest.raises(DomainError):
            lambda_scaling(0.0, 0.1, 0.1)


class TestDpdTest:
    @pytest.mark.parametrize("beta", [0.0, 0.2, 0.7])
    def test_identical_samples(self, beta):
        x = [0.3, 1.9, -0.4, 2.2, 0.8]
        r = dpd_test(x, x, beta)
        assert r.statistic == pytest.approx(0.0, abs=1e-20)
        assert r.p_value == 1.0

    def test_hand_example(self):
        r = dpd_test([0, 2], [1, 3], 0.0, 0.0)
        assert r.statistic == pytest.approx(1.0, rel=1e-15)
        assert r.p_value == pytest.approx(math.erfc(math.sqrt(0.5)), rel=1e-14)
        assert r.p_value == pytest.approx(0.31731, abs=5e-6)

    def test_reduction_to_moment_formula(self):
        rng = np.random.default_rng(3)
        x, y = rng.normal(0, 2, 37), rng.normal(0.5, 2, 23)
        n1, n2 = x.size, y.size
        s0sq = (np.sum((x - x.mean()) ** 2) + np.sum((y - y.mean()) ** 2)) / (n1 + n2)
        expected = n1 * n2 / (n1 + n2) * (x.mean() - y.mean()) ** 2 / s0sq
        assert dpd_test(x, y, 0.0, 0.0).statistic == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("beta,gamma", [(0.2, 0.2), (0.5, 0.3)])
    def test_affine_invariance(self, beta, gamma):
        rng = np.random.default_rng(9)
        x, y = rng.normal(0, 1, 30), rng.normal(0.6, 1, 25)
        s = dpd_test(x, y, beta, gamma).statistic
        assert dpd_test(x + 100, y + 100, beta, gamma).statistic == pytest.approx(s, rel=1e-8)
        assert dpd_test(7.5 * x, 7.5 * y, beta, gamma).statistic == pytest.approx(s, rel=1e-8)

    def test_gamma_defaults_to_beta(self):
        r = dpd_test([0.1, 0.5, 0.9], [1.2, 1.9, 2.4], 0.3)
        assert r.gamma == 0.3

    def test_refuses_unconverged(self):
        rng = np.random.default_rng(1)
        x, y = rng.normal(0, 1, 30), rng.normal(0, 1, 30)
        with pytest.raises(ConvergenceError) as info:
            dpd_test(x, y, 0.5, cfg=SolverConfig(max_iterations=1))
        assert info.value.estimate is not None and not info.value.estimate.converged

    @pytest.mark.parametrize("bad", [-0.1, 1.5])
    def test_rejects_tuning(self, bad):
        with pytest.raises(DomainError):
            dpd_test([0, 1], [2, 3], bad)

    def test_tiny_p_clamped(self):
        x = np.linspace(0, 1, 200)
        r = dpd_test(x, x + 50, 0.0)
        assert r.p_value == 0.0 and r.p_value_clamped

    def test_monotone_in_separation(self):
        s = [dpd_statistic(0.0, d, 1.0, 20, 30, 0.3, 0.3)[0] for d in np.linspace(0, 5, 51)]
        assert all(a < b for a, b in zip(s, s[1:]))


class TestTVector:
    def test_null(self):
        assert t_vector(1.5, 1.5, 2.0, 0.3).as_array().tolist() == [0.0, 0.0, 0.0]

    @given(
        mu1=st.floats(-10, 10), mu2=st.floats(-10, 10), sigma=st.floats(0.1, 10), gamma=st.floats(0, 1)
    )
    @settings(max_examples=200, deadline=None)
    def test_antisymmetry(self, mu1, mu2, sigma, gamma):
        t = t_vector(mu1, mu2, sigma, gamma)
        assert t.t2 == -t.t1

    @pytest.mark.parametrize("gamma", [0.0, 0.1, 0.5, 1.0])
    def test_finite_differences(self, gamma):
        rng = np.random.default_rng(int(gamma * 10) + 1)
        for _ in range(10):
            p = np.array([rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.5, 3)])
            t = t_vector(*p, gamma).as_array()
            fd = np.empty(3)
            for i in range(3):
                h = 1e-6 * p[2]
                e = np.zeros(3)
                e[i] = h
                fd[i] = (dpd_normal_equal_sigma(*(p + e), gamma) - dpd_normal_equal_sigma(*(p - e), gamma)) / (2 * h)
            np.testing.assert_allclose(t, fd, rtol=1e-5, atol=1e-12)


class TestSigmaGamma:
    def test_null_zero(self):
        assert sigma_gamma_sq(0.3, 0.3, AsymptoticParams(0.5, 1.0, 0.1), 0.1) == 0.0

    def test_positive(self):
        assert sigma_gamma_sq(0.0, 0.2, AsymptoticParams(0.3, 2.0, 0.5), 0.4) > 0

    def test_composition(self):
        p = AsymptoticParams(0.5, 1.0, 0.1)
        t = t_vector(0.0, 1.0, 1.0, 0.1).as_array()
        s = np.diag(sigma_w_beta(p))
        assert sigma_gamma_sq(0.0, 1.0, p, 0.1) == pytest.approx(float(np.sum(t * t * s)), rel=1e-14)


class TestPower:
    def test_consistency(self):
        values = [power_approx(0.0, 0.3, 1.0, n, n, 0.1) for n in (10, 100, 1000, 10000)]
        assert all(a < b for a, b in zip(values, values[1:]))
        assert values[-1] == pytest.approx(1.0, abs=1e-12)

    def test_alpha_one(self):
        assert power_approx(0.0, 1.0, 1.0, 50, 50, 0.1, alpha=1.0) > 0.99

    def test_null_rejected(self):
        with pytest.raises(DomainError):
            power_approx(0.5, 0.5, 1.0, 20, 20, 0.1)

    @pytest.mark.parametrize("delta", [1.0, 0.5])
    def test_monte_carlo(self, delta):
        approx = power_approx(0.0, delta, 1.0, 50, 50, 0.1, 0.1)
        reps, rejections = 2000, 0
        for r in range(reps):
            x = rng_stream(77, r, 0, 100).normal(0, 1, 50)
            y = rng_stream(77, r, 1, 100).normal(delta, 1, 50)
            rejections += dpd_test(x, y, 0.1).p_value < 0.05
        assert abs(approx - rejections / reps) < 0.1


class TestLrt:
    def test_identical(self):
        assert lrt_statistic([1.0, 2.0, 4.0], [1.0, 2.0, 4.0]) == 0.0

    def test_hand_example(self):
        assert lrt_statistic([0, 2], [1, 3]) == pytest.approx(4 * math.log(1.25), rel=1e-15)

    def test_close_to_s0_under_null(self):
        gaps = []
        for r in range(500):
            x = rng_stream(5, r, 0, 2000).normal(0, 1, 1000)
            y = rng_stream(5, r, 1, 2000).normal(0, 1, 1000)
            gaps.append(abs(lrt_statistic(x, y) - dpd_test(x, y, 0.0).statistic))
        assert np.mean(np.array(gaps) < 0.01) >= 0.95
