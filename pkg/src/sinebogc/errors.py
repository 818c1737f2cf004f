"""Exception hierarchy shared by the numerical modules and the CLI."""


class SinebogcError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(SinebogcError, ValueError):
    """Input violates a precondition (bad knob, wrong domain, missing range)."""


class HypothesisError(ValidationError):
    """A symbol falls outside the hypotheses of the identity being evaluated."""


class NumericalFailure(SinebogcError, RuntimeError):
    """A computation did not reach its accuracy target or produced garbage.

    ``best`` carries the most accurate value obtained before giving up, if any.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
