"""Exception types shared across the package."""


class DataError(ValueError):
    """Input data cannot be used (malformed file, too few rows, ...)."""


class CsvParseError(DataError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class InsufficientDataError(DataError):
    """Fewer observations than the operation requires."""


class ConfigError(ValueError):
    """Invalid configuration value or combination."""


class CovarianceError(ValueError):
    """Covariance matrix is not usable (not PSD beyond tolerance)."""


class DegenerateMultiplierError(ValueError):
    """Multiplier limit formulas have no usable coordinate."""


class DegenerateConstantError(ValueError):
    """Curvature constant for the order-2 bound is numerically zero."""


class SolverFailure(RuntimeError):
    """A solve ended in a non-optimal status where an optimum was required."""
