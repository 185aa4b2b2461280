"""Exception hierarchy shared by the numerical modules and the CLI."""


class OrliczFracError(Exception):
    """Base class; ``code`` is the machine-parsable tag printed by the CLI."""

    code = "error"


class InvalidParameter(OrliczFracError, ValueError):
    code = "invalid-parameter"


class DegenerateInput(OrliczFracError, ValueError):
    code = "degenerate-input"


class NumericFailure(OrliczFracError, ArithmeticError):
    """Quadrature or tail control failed; carries whatever was computed."""

    code = "numeric-failure"

    def __init__(self, message, partial=None, error_bound=None):
        super().__init__(message)
        self.partial = partial
        self.error_bound = error_bound


class UnboundedNorm(NumericFailure):
    code = "unbounded-norm"


class ConstructionFailure(NumericFailure):
    code = "construction-failure"


class StudyFailure(OrliczFracError):
    code = "study-failure"
