"""Exception types shared across the toolkit.

Every error carries a short ``tag`` so the command line can print a single
machine-parseable line and exit nonzero.
"""


class GSMError(Exception):
    tag = "error"


class DimensionError(GSMError, ValueError):
    tag = "dimension_error"


class PreconditionError(GSMError, ValueError):
    tag = "precondition_error"


class EvaluationError(GSMError, ArithmeticError):
    """Model returned a non-finite value or gradient."""

    tag = "evaluation_error"

    def __init__(self, message, point=None, index=None):
        super().__init__(message)
        self.point = point
        self.index = index


class DegenerateModelError(GSMError, ArithmeticError):
    """Zero variance or zero gradient energy; the metric is undefined."""

    tag = "degenerate_model"

    def __init__(self, message, metric=None):
        super().__init__(message)
        self.metric = metric


class NumericalError(GSMError, ArithmeticError):
    tag = "numerical_error"
