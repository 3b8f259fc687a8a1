"""Finite-rank kernel ridge regression: exact test error and bounds."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .bounds import (
    bach_bounds,
    bounds_report,
    enclosure_bounds,
    min_n_requirement,
    rademacher_gap,
    refined_bias_bounds,
    refined_variance_bounds,
    test_error_bounds,
)
from .data import Dataset, TargetSpec, cos_target, sample_dataset, square_target, target_functionals
from .errors import (
    ConditioningWarning,
    DivergenceError,
    DomainError,
    IllPosedError,
    OracleMisuseError,
    RankBudgetError,
    SingularityError,
)
from .exact import (
    ErrorReport,
    bias_parseval_oracle,
    error_report,
    exact_bias,
    exact_variance,
    fluctuation_state,
    quadrature_test_error_oracle,
    variance_direct_oracle,
)
from .regressor import FittedKRR, fit, predict
from .spectral import SpectralKernel, make_custom, make_legendre, make_tntk

__all__ = [
    "BACKEND",
    "ConditioningWarning",
    "Dataset",
    "DivergenceError",
    "DomainError",
    "ErrorReport",
    "FittedKRR",
    "IllPosedError",
    "OracleMisuseError",
    "RankBudgetError",
    "SingularityError",
    "SpectralKernel",
    "TargetSpec",
    "__version__",
    "bach_bounds",
    "bias_parseval_oracle",
    "bounds_report",
    "cos_target",
    "enclosure_bounds",
    "error_report",
    "exact_bias",
    "exact_variance",
    "fit",
    "fluctuation_state",
    "make_custom",
    "make_legendre",
    "make_tntk",
    "min_n_requirement",
    "predict",
    "quadrature_test_error_oracle",
    "rademacher_gap",
    "refined_bias_bounds",
    "refined_variance_bounds",
    "sample_dataset",
    "square_target",
    "target_functionals",
    "test_error_bounds",
    "variance_direct_oracle",
]
