"""Exception types raised by the attractor_scout package."""


class AttractorScoutError(Exception):
    """Base class for all package-specific errors."""


class NonFiniteError(AttractorScoutError):
    """A state component left the finite range during integration."""

    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index


class BasinEscapeError(AttractorScoutError):
    """A training series failed the automated basin-confinement check."""


class DegenerateSpectrumError(AttractorScoutError):
    """The raw reservoir matrix had no usable positive real eigenvalue part."""


class SingularSystemError(AttractorScoutError):
    """The regularized normal equations are numerically singular."""


class LengthMismatchError(AttractorScoutError, ValueError):
    """A series or transient does not have the required length."""


class EmptySeriesError(AttractorScoutError, ValueError):
    """A statistic was requested for an empty series."""


class ZeroNormalizerError(AttractorScoutError, ValueError):
    """A reference absolute average is zero and cannot normalize errors."""
