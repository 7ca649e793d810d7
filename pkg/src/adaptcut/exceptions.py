"""Exception types shared across the toolkit."""


class AdaptcutError(Exception):
    """Base class for all toolkit errors."""


class InvalidInstanceError(AdaptcutError, ValueError):
    """Weight matrix violates the instance contract (shape, symmetry, range)."""


class DimensionError(AdaptcutError, ValueError):
    """Operands built for different qubit counts were combined."""


class ResourceLimitError(AdaptcutError, RuntimeError):
    """Requested size exceeds a hard backend limit (dense simulation, brute force)."""


class UnsupportedMixerError(AdaptcutError, ValueError):
    """Operation does not apply to this mixer kind."""


class InvalidParameterError(AdaptcutError, ValueError):
    """Configuration or call parameter outside its documented domain."""
