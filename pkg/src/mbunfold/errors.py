"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class InconsistentPairError(ValueError):
    """A (signal, folded signal) pair does not differ by a 2*lambda lattice element."""


class DegenerateFilterError(ValueError):
    """The leading filter tap is zero, so the filter cannot be normalized."""


class AliasCollisionError(ValueError):
    """Two carriers coincide after reduction modulo the sampling frequency."""


class RateTooSlowError(ValueError):
    """The sampling period is too long for the shrinkage bound to contract."""

    def __init__(self, message, max_sample_period):
        super().__init__(message)
        self.max_sample_period = max_sample_period


class RecoveryError(RuntimeError):
    """Base class for failures of the unfolding recursion."""

    def __init__(self, message, index=None, observed_max=None):
        super().__init__(message)
        self.index = index
        self.observed_max = observed_max


class WarmupViolationError(RecoveryError):
    """A fold was detected inside the fold-free warm-up prefix."""


class OrderTooSmallError(RecoveryError):
    """The filtered signal exceeded the threshold at an index assumed fold-free."""


class IngestError(ValueError):
    """A series file is malformed; ``line`` is the 1-based offending line, if known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
