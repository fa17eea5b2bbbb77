"""Shared exception types."""


class NSchurError(Exception):
    """Base class for all package errors."""


class ExponentOverflow(NSchurError):
    """A monomial exponent exceeded the supported bound."""


class DegenerateSubstitution(NSchurError):
    """A substitution made a denominator vanish identically."""


class InvalidRange(NSchurError):
    """Index-range parameters out of the supported region."""


class NotInRange(NSchurError):
    """A sequence does not belong to the requested finite family."""


class SingularH0(NSchurError):
    """The constant block of a coefficient model is not invertible."""


class NonMonic(NSchurError):
    """Operator root requested for a non-monic operator."""


class RankDeficient(NSchurError):
    """A coefficient matrix has rank below the requested minor size."""


class NonStabilizing(NSchurError):
    """Truncation of an infinite determinant failed to stabilize."""


class PoleNearSample(NSchurError):
    """A sample point sits too close to a zero of a tau function."""


class DomainExceeded(NSchurError):
    """Numeric evaluation requested outside the reliable series range."""


class TruncationInsufficient(NSchurError):
    """A truncated expansion changed materially when deepened."""
