"""Exception types raised by the simulator."""


class ThomsonError(Exception):
    """Base class for all simulator errors."""


class DomainError(ThomsonError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(ThomsonError, ValueError):
    """Invalid configuration. ``key`` names the offending entry when known."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class NoCrossingError(DomainError):
    """The requested intensity threshold is never crossed on the rising edge."""


class PropagationError(ThomsonError, ArithmeticError):
    """Non-finite values appeared while integrating a trajectory."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class EndpointArtifactError(ThomsonError):
    """Trajectory is truncated while still accelerating and no window was requested."""


class CoverageError(DomainError):
    """A phase-space box does not contain enough of the state."""


class NegativeWignerError(DomainError):
    """Sampling refused: the Wigner function is negative in some phase-space region."""
