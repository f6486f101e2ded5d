"""Exceptions raised by spikedpca.

Precondition failures derive from ``ValueError`` and numerical failures from
``ArithmeticError`` so callers that only know the builtin types still catch
them. The CLI maps the two families to different exit codes.
"""


class SpikedPcaError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(SpikedPcaError, ValueError):
    """An input lies outside the domain of the requested operation."""


class InvalidParameter(PreconditionError):
    pass


class DegenerateSignal(PreconditionError):
    """The realized signal strength is zero, so the expansion point is degenerate."""


class NotSymmetric(PreconditionError):
    pass


class InvalidDof(PreconditionError):
    pass


class ConditionViolated(PreconditionError):
    """A bound's hypothesis does not hold, so the bound is not claimed."""


class RegimeViolation(PreconditionError):
    """Called outside the ``n <= p`` regime."""


class DegenerateSpectrum(PreconditionError):
    pass


class SupportViolation(PreconditionError):
    """An argument lies inside (or on the edge of) the support of a density."""


class BulkViolation(PreconditionError):
    """An argument lies inside the Marchenko-Pastur bulk or below the detection threshold."""


class NumericalError(SpikedPcaError, ArithmeticError):
    """An iterative kernel failed to reach its tolerance."""


class RootBracketFailure(NumericalError):
    pass


class RootNotFound(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class IoFailure(SpikedPcaError, OSError):
    """Reading or writing an artifact failed."""
