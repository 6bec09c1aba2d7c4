"""Robust two-sample tests for equal normal means based on the density power divergence."""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError, QuadratureError
from .mdpde import Sample, SolverConfig, estimate_one_sample, estimate_two_sample
from .dpdtest import dpd_test, lambda_scaling, power_approx
from .classical import ks_test, pooled_t_test, trimmed_t_test, wilcoxon_test

__all__ = [
    "__version__",
    "ConvergenceError",
    "DomainError",
    "QuadratureError",
    "Sample",
    "SolverConfig",
    "estimate_one_sample",
    "estimate_two_sample",
    "dpd_test",
    "lambda_scaling",
    "power_approx",
    "pooled_t_test",
    "trimmed_t_test",
    "wilcoxon_test",
    "ks_test",
]
