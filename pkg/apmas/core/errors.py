"""
Exception hierarchy shared by the numerical core and the command-line tool.

Every exception carries the process exit code the CLI maps it to:
    2  validation failure (bad scenario file, bad graph, bad layout)
    3  numerical failure (blow-up, eigensolver without convergence)
    4  I/O failure (raised as OSError by the standard library)
"""

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class ApmasError(Exception):
    """Base class of every error raised by apmas."""
    exit_code = EXIT_FAILURE


class ValidationError(ApmasError):
    """
    A value violates a documented invariant.

    Args:
        field (str): Path of the offending field, e.g. ``edges[0]`` or ``inputs[1].targets``.
        message (str): Human readable description of the violation.
    """
    exit_code = EXIT_VALIDATION

    def __init__(self, field: str, message: str) -> None:
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class InvalidGraph(ValidationError):
    pass


class InvalidLayout(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class TooManyInputs(InvalidLayout):
    """More exogenous inputs than agents; the padded input vector needs m <= n."""


class GraphNotConnected(ValidationError):
    def __init__(self, message: str = "graph is not connected") -> None:
        super().__init__("edges", message)


class ParseError(ApmasError):
    """A scenario file cannot be decoded."""
    exit_code = EXIT_VALIDATION

    def __init__(self, path, message: str) -> None:
        self.path = str(path)
        super().__init__(f"{self.path}: {message}")


class DimensionMismatch(ApmasError, ValueError):
    exit_code = EXIT_VALIDATION


class LinearAlgebraError(ApmasError):
    pass


class NotSymmetric(LinearAlgebraError):
    pass


class NotLaplacian(LinearAlgebraError):
    pass


class NumericalError(ApmasError):
    exit_code = EXIT_NUMERICAL


class NumericalBlowup(NumericalError):
    """State magnitude left the representable range; usually dt is too large."""

    def __init__(self, t: float, magnitude: float) -> None:
        self.t = t
        self.magnitude = magnitude
        super().__init__(f"state magnitude {magnitude:.3e} at t={t:.6g} exceeds 1e12 (step size too large?)")


class NoConvergence(NumericalError):
    pass


class InvariantViolation(ApmasError):
    """An algebraic identity that must hold after a construction does not."""
