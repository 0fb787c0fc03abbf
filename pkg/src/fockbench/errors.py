"""Exception hierarchy shared by every fockbench module."""


class FockBenchError(Exception):
    """Base class for all library errors."""


class DomainError(FockBenchError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class TruncationError(FockBenchError):
    """The truncated Fock basis is too small for the requested state."""


class DimensionMismatch(FockBenchError, ValueError):
    """Two objects that must share a basis size do not."""


class ConvergenceError(FockBenchError):
    """A propagator could not reach its tolerance within its iteration caps."""


class SingularFit(FockBenchError):
    """A linear design matrix is rank deficient."""


class FitDiverged(FockBenchError):
    """A nonlinear fit failed to find an acceptable optimum."""


class PeakNotFound(FockBenchError):
    """Peak detection did not find the requested number of maxima."""


class ParseError(FockBenchError):
    """Bench-program syntax error with 1-based line and column."""

    def __init__(self, message, line=0, column=0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class UnknownUnit(ParseError):
    """A quantity carries a unit suffix that is not allowed in its slot."""


class DuplicateLabel(ParseError):
    """Two measurements or outputs share one label."""
