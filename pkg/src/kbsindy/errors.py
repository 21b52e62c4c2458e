"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input data violates a structural invariant (non-finite, non-monotone, ...)."""


class SchemaError(ValueError):
    """A CSV schema or column-role map does not match the file."""


class ParseError(ValueError):
    """A cell in a data file could not be parsed as a number."""


class ConfigError(ValueError):
    """An experiment or search configuration is inconsistent."""


class ShapeError(ValueError):
    """Array dimensions do not match what an operation requires."""


class UndefinedMetricError(ValueError):
    """A score is mathematically undefined for the given inputs."""


class UnsupportedGridError(ValueError):
    """Finite-difference stencils require a uniform grid."""


class NumericalError(RuntimeError):
    """A linear solve failed even after jitter escalation."""


class IntegrationError(RuntimeError):
    """A simulation produced a non-finite state."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
