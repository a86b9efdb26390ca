"""Error hierarchy shared by the numerical apps and the command-line harness."""
from __future__ import annotations


class PurificationError(Exception):
    """Base class for every failure raised by the purification apps."""


class ConfigurationError(PurificationError, ValueError):
    """Inputs violate a documented precondition (usage error)."""


class NumericalError(PurificationError, ArithmeticError):
    """A computation could not be carried out to the requested accuracy."""


class AcceptanceCheckFailed(PurificationError):
    """A self-check ran to completion but its result is outside tolerance."""


class InvalidStateError(ConfigurationError):
    """Bloch vector outside the ball (beyond the radial slack) or non-finite."""


class DegenerateDirectionError(ConfigurationError):
    """The state has no direction (r = 0) so no alignment is defined."""


class UnattainablePurityError(ConfigurationError):
    """Requested impurity lies below what the detectors can sustain."""


class UnsupportedRegimeError(ConfigurationError):
    """The formula requested is not defined for these parameters."""


class InvalidProtocolError(ConfigurationError):
    """Protocol kind and detector count do not match."""


class DeltaLimitError(ConfigurationError):
    """Stationary purity law requested for ideal detectors (delta function at p=1)."""


class SingularTermError(NumericalError):
    """A 1/s term diverges (s = 0 with an inefficient detector)."""


class IntegratorOvershootError(NumericalError):
    """An Ito step left the Bloch ball by more than the radial slack."""


class NonFiniteStateError(NumericalError):
    """A state component became NaN or infinite."""


class QuadratureError(NumericalError):
    """Quadrature did not reach the requested tolerance."""


class StepSizeError(NumericalError):
    """Time step violates the stability bound of an explicit scheme."""


class SchemeError(NumericalError):
    """A discretization produced an inadmissible value (e.g. negative density)."""


class NumericUnderflowError(NumericalError):
    """A probability that must be positive underflowed to zero."""


class InconsistencyError(NumericalError):
    """Two computations that must agree do not."""


class WorkerFailure(NumericalError):
    """A parallel worker failed; partial results were discarded."""


__all__ = [
    "AcceptanceCheckFailed",
    "ConfigurationError",
    "DegenerateDirectionError",
    "DeltaLimitError",
    "InconsistencyError",
    "IntegratorOvershootError",
    "InvalidProtocolError",
    "InvalidStateError",
    "NonFiniteStateError",
    "NumericUnderflowError",
    "NumericalError",
    "PurificationError",
    "QuadratureError",
    "SchemeError",
    "SingularTermError",
    "StepSizeError",
    "UnattainablePurityError",
    "UnsupportedRegimeError",
    "WorkerFailure",
]
