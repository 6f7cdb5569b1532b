"""Exception types raised by mg1split."""


class SingularMatrixError(ValueError):
    """A matrix that must be inverted has a (numerically) zero pivot."""


class PerronFailure(RuntimeError):
    """Power iteration failed to deliver a usable (positive) Perron pair."""


class GuardExceededError(ValueError):
    """A dense Kronecker construction would exceed the configured size guard."""


class ParseError(ValueError):
    """Malformed model file.

    Parameters
    ----------
    message : str
        What went wrong.
    lineno : int or None
        1-based line number in the offending file.
    """

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ValidationError(ValueError):
    """A model violates nonnegativity or row-stochasticity."""

    def __init__(self, issues):
        self.issues = list(issues)
        kinds = sorted({issue.kind for issue in self.issues})
        super().__init__(
            f"{len(self.issues)} validation issue(s): {', '.join(kinds)}"
        )
