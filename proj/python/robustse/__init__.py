"""Heteroskedasticity-robust covariance estimation for regressions with many controls."""

from ._robustse import (
    RobustseError,
    __version__,
    annihilator_diag,
    estimate_all,
    fit_ols,
    methods,
    partial_out,
    run_study,
    t_test,
    wald_test,
)

__all__ = [
    "RobustseError",
    "__version__",
    "annihilator_diag",
    "estimate_all",
    "fit_ols",
    "methods",
    "partial_out",
    "run_study",
    "t_test",
    "wald_test",
]
