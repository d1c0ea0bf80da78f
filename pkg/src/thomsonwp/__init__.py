"""Strong-field Thomson scattering by single electrons and their wave packets."""
__version__ = "0.1.0"

from ._backend import NAME as KERNELS  # noqa: E402
from .errors import (ConfigError, CoverageError, DomainError, EndpointArtifactError,  # noqa: E402
                     NegativeWignerError, NoCrossingError, PropagationError, ThomsonError)

__all__ = [
    "__version__", "KERNELS", "ThomsonError", "DomainError", "ConfigError", "NoCrossingError",
    "PropagationError", "EndpointArtifactError", "CoverageError", "NegativeWignerError",
]
