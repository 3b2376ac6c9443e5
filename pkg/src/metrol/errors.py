"""Exception types raised across the package."""


class MetrolError(Exception):
    """Base class for all package errors."""


class DomainError(MetrolError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class SingularPointError(DomainError):
    """Point evaluation requested at an integrable singularity."""


class DegenerateRootsError(MetrolError):
    """Two roots of the amplitude cubic coincide; partial fractions break down."""


class ResolutionError(MetrolError):
    """A grid is too coarse for the requested computation.

    ``suggested_h`` carries a step that should pass the failed check.
    """

    def __init__(self, message, suggested_h=None):
        super().__init__(message)
        self.suggested_h = suggested_h


class AmplitudeVanishesError(MetrolError):
    """Decay rates are undefined once |c(t)| drops below threshold."""

    def __init__(self, message, cutoff_index):
        super().__init__(message)
        self.cutoff_index = cutoff_index


class NoBracketError(MetrolError):
    """Bound-state bracket expansion failed (malformed spectral model)."""


class SingularOutcomeError(MetrolError):
    """An outcome with zero probability has a non-zero derivative."""


class ConfigError(MetrolError):
    """Invalid experiment configuration; the message names the field."""
