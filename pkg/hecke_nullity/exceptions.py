"""Exceptions raised by hecke-nullity.

Precondition failures are ValueErrors so callers can treat them as bad
input; internal invariant failures are RuntimeErrors. The CLI maps each
family to its own exit code.
"""


class HeckeNullityError(Exception):
    """Base class for all hecke-nullity errors."""


class PreconditionError(HeckeNullityError, ValueError):
    """An operation was called outside its domain."""


class NonSquareMatrixError(PreconditionError):
    pass


class ZeroPolynomialError(PreconditionError):
    pass


class NotPrimeError(PreconditionError):
    pass


class RamifiedPrimeError(PreconditionError):
    pass


class CharacterSpecError(PreconditionError):
    pass


class ParityMismatchError(PreconditionError):
    pass


class UnsupportedWeightError(PreconditionError):
    pass


class InsufficientPrecisionError(PreconditionError):
    pass


class NonIntegralLeadingPowerError(PreconditionError):
    pass


class PDividesLevelError(PreconditionError):
    pass


class ClassNumberNotOneError(PreconditionError):
    pass


class UnitInconsistencyError(PreconditionError):
    pass


class InvariantViolation(HeckeNullityError, RuntimeError):
    """A property that must always hold was observed to fail."""


class NoDecompositionError(InvariantViolation):
    pass


class NonIntegralCharpolyError(InvariantViolation):
    pass


class NonRationalCoefficientError(InvariantViolation):
    pass


class CMOverlapError(InvariantViolation):
    pass


class TheoremViolation(HeckeNullityError):
    """A computed multiplicity contradicts m(0, k) <= m(0, k')."""
