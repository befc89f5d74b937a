"""Exception hierarchy shared across the package."""


class LandmarkSegError(Exception):
    """Base class for all errors raised by landmarkseg."""


class DimensionError(LandmarkSegError, ValueError):
    """Operand shapes are incompatible with the requested operation."""


class ValidationError(LandmarkSegError, ValueError):
    """An input violates a structural invariant (symmetry, range, ...)."""


class NumericError(LandmarkSegError, ArithmeticError):
    """An iterative numeric routine failed to converge or produced non-finite values."""


class OptimizerError(LandmarkSegError, RuntimeError):
    """The optimizer received an unusable gradient."""


class ConfigError(LandmarkSegError, ValueError):
    """A model or run configuration is invalid or incomplete."""


class GeometryError(LandmarkSegError, ValueError):
    """A geometric primitive received degenerate input."""


class GenerationError(LandmarkSegError, RuntimeError):
    """Synthetic data generation could not satisfy its constraints."""


class ParseError(LandmarkSegError, ValueError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class MetricError(LandmarkSegError, ValueError):
    """A metric received input it is undefined for."""


class DegenerateSampleError(MetricError):
    """A statistical test received a degenerate sample (e.g. all-zero differences)."""


class PairingError(MetricError):
    """Paired records do not line up across models."""
