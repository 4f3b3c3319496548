"""Global sensitivity metrics from active subspaces.

Sobol' total indices, derivative-based measures, standardized linear
coefficients, the first eigenvector of the gradient outer-product matrix and
activity scores, by tensor Gauss-Legendre quadrature or by Monte Carlo with
bootstrap standard errors.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateModelError,
    DimensionError,
    EvaluationError,
    GSMError,
    NumericalError,
    PreconditionError,
)
from .model import ModelSpec, ParameterSpec, eval_normalized, grad_normalized, to_natural  # noqa: E402

__all__ = [
    "DegenerateModelError",
    "DimensionError",
    "EvaluationError",
    "GSMError",
    "ModelSpec",
    "NumericalError",
    "ParameterSpec",
    "PreconditionError",
    "eval_normalized",
    "grad_normalized",
    "to_natural",
]
