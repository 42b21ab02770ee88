"""Exception hierarchy shared by all modules."""


class QfbError(Exception):
    """Base class for package errors."""


class ParameterError(QfbError, ValueError):
    """Invalid physical or numerical parameter."""


class PoleError(QfbError, ZeroDivisionError):
    """Evaluation at (or numerically at) a pole."""

    def __init__(self, s, message=None):
        self.s = s
        super().__init__(message or f"pole at s={s!r}")


class UndefinedRootsError(QfbError, ValueError):
    """Roots requested for the zero polynomial."""


class SignatureError(QfbError, ValueError):
    """Incompatible port signatures in an interconnection."""


class SingularInterconnectionError(QfbError, ZeroDivisionError):
    """Feedback denominator vanishes identically."""


class NyquistPreconditionError(QfbError, ValueError):
    """Nyquist test requested for an open loop with unstable poles."""


class NumericGuardError(QfbError, ArithmeticError):
    """A numerical conditioning guard rejected the computation."""


class InternalConsistencyError(QfbError, ArithmeticError):
    """Two independent computations of the same quantity disagree."""


class CareError(QfbError, ArithmeticError):
    """The algebraic Riccati equation could not be solved."""


class RankDeficiencyError(QfbError, ArithmeticError):
    """Controllability or observability rank is not full."""
