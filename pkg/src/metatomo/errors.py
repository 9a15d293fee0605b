"""Exception types raised by the design, simulation, and reconstruction code."""


class MetatomoError(Exception):
    """Base class for all package-specific errors."""


class DegeneratePairError(MetatomoError):
    """The polarization pair is linear (sin(beta)*sin(2*alpha) = 0).

    Linear pairs are left unchanged by handedness reversal, so the geometric
    phase cannot span a full cycle and no grating can be synthesized.
    """


class NoSolutionError(MetatomoError):
    """The scalar retardance solve failed to reach unit overlap modulus."""


class UnreachablePhaseError(MetatomoError):
    """A target geometric phase is not attained by any orientation in [0, pi)."""


class FitDivergedError(MetatomoError):
    """Histogram fit did not converge within the iteration budget."""


class DegenerateHistogramError(MetatomoError):
    """Histogram has no significant peak above the background noise level."""


class UnderdeterminedSystemError(MetatomoError):
    """Correlation data do not fix all free state parameters (rank deficit)."""
