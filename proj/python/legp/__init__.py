"""Locally epistatic genomic prediction.

Thin package wrapper around the compiled core: kernel construction, mixed-model
variance-component fits, hierarchical region tests, sparse EBLUP combination,
selection indices and cross-progeny distributions.
"""

from ._core import (
    CombinedModel,
    FitResult,
    LrtResult,
    NumericError,
    ValidationError,
    __version__,
    combine_kernels,
    cross_distribution,
    fit_joint,
    fit_lasso,
    fit_marginal,
    fit_single,
    gaussian_kernel,
    hadamard,
    jannink_index,
    kernel_alignment,
    lambda_path,
    linear_kernel,
    loglik,
    lrt_variance,
    median_squared_distance,
    polynomial_kernel,
    predict,
    predict_combined,
    preference_index,
    qiu_weights,
    reml_loglik,
    shrink_kernel,
    simulate_population,
    train_test_split,
)

__all__ = [
    "CombinedModel",
    "FitResult",
    "LrtResult",
    "NumericError",
    "ValidationError",
    "__version__",
    "combine_kernels",
    "cross_distribution",
    "fit_joint",
    "fit_lasso",
    "fit_marginal",
    "fit_single",
    "gaussian_kernel",
    "hadamard",
    "jannink_index",
    "kernel_alignment",
    "lambda_path",
    "linear_kernel",
    "loglik",
    "lrt_variance",
    "median_squared_distance",
    "polynomial_kernel",
    "predict",
    "predict_combined",
    "preference_index",
    "qiu_weights",
    "reml_loglik",
    "shrink_kernel",
    "simulate_population",
    "train_test_split",
]
