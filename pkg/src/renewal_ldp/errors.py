"""Exception types shared across the package."""


class RenewalLdpError(Exception):
    """Base class for package errors."""


class QuadratureError(RenewalLdpError):
    """Adaptive integration could not reach the requested relative tolerance."""


class DomainError(RenewalLdpError, ValueError):
    """A tilt exponent or argument is outside the admissible domain."""


class InfeasibleTargetError(RenewalLdpError, ValueError):
    """A moment target lies outside the attainable set (affine regime / boundary)."""


class BracketError(RenewalLdpError):
    """An optimizer failed to bracket an extremum or a root."""


class BudgetError(RenewalLdpError):
    """A simulation would exceed its arrival budget."""


class TailSamplingError(RenewalLdpError):
    """The conditional tail of a law cannot be sampled (e.g. no atoms beyond s)."""


class MismatchError(RenewalLdpError, ValueError):
    """A measure's base law differs from the law it is evaluated against."""


class LawParseError(RenewalLdpError, ValueError):
    """A law/function/event specification string could not be parsed."""


class CheckError(RenewalLdpError):
    """A verification input is rejected (e.g. C_f >= 1 in the free-energy check)."""
