"""Exception types. Each maps onto one CLI exit code."""


class DataError(ValueError):
    """Invalid input data (missing cells, zero variance, bad shapes in a file)."""

    exit_code = 3


class DimensionMismatch(ValueError):
    """A model or parameter set was applied to data of the wrong width."""

    exit_code = 4


class NumericalError(ArithmeticError):
    """A numerical kernel failed (no convergence, matrix not positive definite)."""

    exit_code = 5


class DegenerateError(NumericalError):
    """Quantity undefined for constant input, e.g. a correlation with a zero-variance vector."""
