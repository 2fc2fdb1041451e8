"""Exception types shared across the solver modules."""


class DomainError(ValueError):
    """A scalar argument lies outside its admissible range."""


class ShapeError(ValueError):
    """An array argument has the wrong length or shape."""


class SizeError(ValueError):
    """A problem size exceeds a guard meant for test-scale dense work."""


class DivisibilityError(ValueError):
    """An integer argument fails a required divisibility relation."""


class UnsupportedNonlinearity(ValueError):
    """The splitting scheme needs its nonlinear extension enabled for sigma > 0."""


class NonConvergence(RuntimeError):
    """The implicit solver did not reach its tolerance within the iteration cap.

    Carries the number of fixed-point evaluations, the last certified
    residual, and (when raised from a trajectory driver) the failing step.
    """

    def __init__(self, message: str, iterations: int, residual: float, step: int | None = None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.step = step


class ConfigError(ValueError):
    """An experiment configuration is internally inconsistent."""


class ParseError(ValueError):
    """Syntax error in a config file, with 1-based line and column."""

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValidationError(ValueError):
    """A config value violates a module-level precondition."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class UnknownKeyError(ValueError):
    """A config key does not name any known setting."""

    def __init__(self, key: str, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unknown config key {key!r}{where}")
        self.key = key
        self.line = line


class IoError(RuntimeError):
    """File I/O failure with the offending path attached."""

    def __init__(self, path, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
