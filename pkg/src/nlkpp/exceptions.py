"""Exception hierarchy shared by all solver modules."""


class NlkppError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(NlkppError, ValueError):
    """Invalid construction arguments (kernel family, grid extent, config keys)."""


class DomainError(NlkppError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResolutionError(ConfigurationError):
    """The grid does not resolve the kernel radius (sigma / h < 4)."""

    def __init__(self, message, required_n=None):
        super().__init__(message)
        self.required_n = required_n


class ShapeError(NlkppError, ValueError):
    """Fields or trajectories live on incompatible grids or time samples."""


class NumericalError(NlkppError, ArithmeticError):
    """An iterative solve failed; ``diagnostics`` carries iteration details."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class RegimeError(NlkppError, ValueError):
    """A limit object was requested outside the regime where it exists."""


class FitError(NlkppError, ValueError):
    """Too few usable points for a power-law fit."""
