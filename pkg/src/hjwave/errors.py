"""Exception hierarchy shared by all hjwave modules."""


class HJWaveError(Exception):
    """Base class for every error raised by hjwave."""


class DomainError(HJWaveError, ValueError):
    """Input outside the mathematical domain (non-finite, negative radius, ...)."""


class BranchError(HJWaveError):
    """A complex argument came too close to the square-root branch cut."""


class RangeError(HJWaveError, ValueError):
    """Value outside the range of a bounded map."""


class GridError(HJWaveError):
    """The grid cannot contain the requested state."""


class ConvergenceError(HJWaveError):
    """An iterative method hit its iteration cap."""


class LeakError(HJWaveError):
    """Probability reached the grid boundary during propagation."""


class StepSizeError(HJWaveError):
    """Time step violates the stability bound or the accuracy target."""


class SignalError(HJWaveError):
    """A measured signal is below its noise floor."""


class FitError(HJWaveError, ValueError):
    """A scaling fit received unusable data."""


class NormalizabilityError(HJWaveError):
    """The requested packet is not square integrable."""

    def __init__(self, message, growth_exponent):
        super().__init__(message)
        self.growth_exponent = growth_exponent


class ConfigError(HJWaveError, ValueError):
    """Invalid run configuration."""
