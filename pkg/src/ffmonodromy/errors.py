"""Exception hierarchy.

Every numerical failure is raised, never downgraded to a warning. The CLI maps
``ValidationError`` subclasses and ``NumericalError`` subclasses to distinct
exit codes.
"""


class FFMonodromyError(Exception):
    """Base class for all package errors."""


class ValidationError(FFMonodromyError, ValueError):
    """Bad input: a precondition of an operation does not hold."""


class NumericalError(FFMonodromyError, ArithmeticError):
    """A computation ran but could not meet its accuracy contract."""


# core models
class UnsupportedPotential(ValidationError):
    pass


class NotSingular(ValidationError):
    pass


class NotCritical(ValidationError):
    pass


class IndeterminateClassification(NumericalError):
    pass


# dynamics
class ChartExit(NumericalError):
    pass


class ToleranceFailure(NumericalError):
    pass


class NoOscillation(ValidationError):
    pass


class DegenerateRoot(NumericalError):
    pass


class MultipleComponents(ValidationError):
    """The value has a disconnected fiber; the caller must pick a component."""


class NonConvergence(NumericalError):
    pass


# lattice / monodromy
class LoopTooClose(ValidationError):
    pass


class VerificationFailure(NumericalError):
    pass


class InconsistentGenerators(NumericalError):
    pass


class BranchAmbiguity(NumericalError):
    pass


class NonIntegerHolonomy(NumericalError):
    pass


class NotUnimodular(ValidationError):
    pass


class BasisMismatch(ValidationError):
    pass


# reduction / affine / Bohr-Sommerfeld
class CutoffTooLow(ValidationError):
    pass


class PathInvalid(ValidationError):
    pass


class CellTrackingLost(NumericalError):
    pass
