"""Exception types raised by the solver modules.

Each one subclasses the closest builtin so callers that only know about
``ValueError`` / ``ArithmeticError`` keep working.
"""


class ParameterError(ValueError):
    """Invalid argument value or mismatched dimensions."""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class SingularityError(ArithmeticError):
    """A pivot on a triangular diagonal (or a circulant eigenvalue) is zero."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class BreakdownError(ArithmeticError):
    """Arnoldi produced a zero vector while the residual is still above tol."""


class ResourceCapError(RuntimeError):
    """Dense size cap or GMRES memory budget exceeded."""
