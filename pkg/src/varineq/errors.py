"""Exception hierarchy.

``NumericalError`` subclasses signal an engine failure (quadrature that
does not converge, a limit that cannot be extrapolated, ...).  The CLI maps
them to exit code 3.
"""


class VarineqError(Exception):
    pass


class InvalidArgumentError(VarineqError, ValueError):
    pass


class InvalidStateError(VarineqError):
    pass


class NumericalError(VarineqError):
    pass


class AccuracyError(NumericalError):
    """Adaptive quadrature gave up; carries its best estimate."""

    def __init__(self, message, value=float("nan"), err_est=float("inf")):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


class CrossCheckError(NumericalError):
    pass


class InconsistencyError(NumericalError):
    pass


class DivergenceError(NumericalError):
    pass


class LimitError(NumericalError):
    pass


class SearchError(NumericalError):
    pass
