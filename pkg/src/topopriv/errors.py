"""Exception hierarchy shared by all topopriv modules."""


class TopoprivError(Exception):
    """Base class for all errors raised by this package."""


class EmptyGraph(TopoprivError):
    """Laplacian weights requested for a multi-node graph with no edges."""


class InvalidGamma(TopoprivError):
    """Weight parameter outside (0, 1]."""


class SpanningTreeUnreachable(TopoprivError):
    """Random digraph rejection sampling exhausted its retry budget."""


class EigenFailure(TopoprivError):
    """Dense eigenvalue solver failed to converge."""


class InvalidLag(TopoprivError):
    """Lag coefficients violate the zero-sum / leading-entry contract."""


class ZeroSumViolated(InvalidLag):
    """Lag coefficients of order >= 1 do not sum to zero."""


class LeadingZero(InvalidLag):
    """First lag coefficient is zero."""


class DimensionMismatch(TopoprivError):
    """Operand shapes are incompatible."""


class Overflow(TopoprivError):
    """Simulated state magnitude exceeded the overflow guard."""


class SingularGram(TopoprivError):
    """Observation Gram matrix is numerically singular."""


class TooLarge(TopoprivError):
    """Requested dense block-matrix oracle exceeds the size guard."""


class InvalidMoment(TopoprivError):
    """Fourth moment smaller than squared variance."""


class InsufficientPoints(TopoprivError):
    """Not enough points left for a rate fit."""


class NonPositiveValue(TopoprivError):
    """Log-log fit requested on non-positive values."""


class QuadratureFailure(TopoprivError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ConfigInvalid(TopoprivError):
    """Experiment configuration failed validation."""
