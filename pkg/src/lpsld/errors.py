"""Exception hierarchy.

Every error carries a machine-readable ``code`` (the class name) and the CLI
exit status it maps to.
"""


class LpSldError(Exception):
    exit_status = 5

    @property
    def code(self):
        return type(self).__name__


class InvalidParameter(LpSldError, ValueError):
    exit_status = 2


class DomainViolation(LpSldError, ValueError):
    """Tilt outside the effective domain R x (-inf, 1/p)."""


class NotAdmissible(LpSldError):
    """Deviation point outside the admissible domain of the rate function."""
    exit_status = 3


class RegimeViolation(LpSldError):
    exit_status = 4


class NumericalBreakdown(LpSldError, ArithmeticError):
    pass


class QuadratureError(NumericalBreakdown):
    pass


class MaxIterations(NumericalBreakdown):
    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class ZeroGradient(NumericalBreakdown):
    pass


class DegenerateTilt(NumericalBreakdown):
    pass


class ComplexKappa(NumericalBreakdown):
    pass


class NegativeBracket(NumericalBreakdown):
    pass
