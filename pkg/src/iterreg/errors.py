"""Exception types shared across the package."""


class IterRegError(Exception):
    """Base class for all library errors."""


class ContractViolation(IterRegError, ValueError):
    """An argument violates an operation's contract (dimensions, ranges, ...)."""


class NumericalFailure(IterRegError, ArithmeticError):
    """Non-finite values appeared during an iteration."""


class CertificationFailure(IterRegError):
    """Saddle-point certification did not reach the requested tolerances."""

    def __init__(self, message, feas_res=None, subgrad_res=None):
        super().__init__(message)
        self.feas_res = feas_res
        self.subgrad_res = subgrad_res


class CertificateInvalid(IterRegError):
    """A reference certificate failed a consistency check it must satisfy."""


class AssumptionViolated(IterRegError):
    """A mathematical assumption required by a bound or rule does not hold."""


class BoundViolation(IterRegError):
    """A measured quantity exceeded its theoretical bound beyond tolerance."""


class RuleInapplicable(IterRegError):
    """A stopping rule was invoked in a regime where it is undefined."""
