"""Exception hierarchy shared across the package.

Two families: parameter/parse problems (bad arguments, malformed files)
and numerical failures (rank deficiency, singular triangular solves).
The CLI maps them to distinct exit codes.
"""


class ParameterError(ValueError):
    """Invalid argument or configuration value."""


class MatrixMarketError(ParameterError):
    """Malformed Matrix Market file; message names the offending line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class NumericalError(RuntimeError):
    """A computation failed for numerical reasons."""


class RankDeficiencyError(NumericalError):
    """Input matrix does not have full column rank where required."""


class SingularTriangularError(NumericalError):
    """Triangular matrix has a (near-)zero diagonal entry."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
