"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A caller-supplied argument violates an operation's precondition."""


class EdgeListError(ValueError):
    """An edge-list file could not be read or parsed."""


class NumericalFailure(ArithmeticError):
    """A numerical routine failed (non-finite values, no convergence)."""


class PoleError(NumericalFailure):
    """A rational function's denominator vanished where it is evaluated."""


class SingularSystemError(NumericalFailure):
    """A linear system was singular to working precision."""


class NoFitError(RuntimeError):
    """Every candidate (m, n) order failed during an order search."""
