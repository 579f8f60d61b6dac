"""Exception types shared across the package."""


class TriodeLabError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TriodeLabError):
    """Non-finite or otherwise malformed numeric input."""


class InvalidConfigError(TriodeLabError):
    """A configuration value violates a documented precondition."""


class HypothesisViolationError(TriodeLabError):
    """Sampling found a point where a potential hypothesis fails.

    Carries the offending sample so the caller can report it.
    """

    def __init__(self, message, sample=None):
        super().__init__(message)
        self.sample = sample


class NonConvergenceError(TriodeLabError):
    """Optimizer stalled above tolerance; carries the last iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class InvalidProfileError(TriodeLabError):
    """A connection profile violates its invariants (e.g. sigma <= 0)."""


class InsufficientTailError(TriodeLabError):
    """Too few tail points for a decay fit; suggests a larger half-length."""


class DegenerateFieldError(TriodeLabError):
    """Field lacks the structure a diagnostic requires."""


class StructureViolationError(TriodeLabError):
    """Field does not exhibit the expected triple-junction structure."""


class ScaleLimitError(TriodeLabError):
    """Interface curve too short for the requested discretization level."""


class CertificateViolationError(TriodeLabError):
    """Certified lower bound exceeds the measured energy beyond tolerance."""


class ConsistencyWarning(UserWarning):
    """Soft inconsistency between configured assumptions and measured data."""
