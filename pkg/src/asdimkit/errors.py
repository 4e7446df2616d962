"""Exception types shared across the toolkit.

Every failure mode that a caller may want to branch on gets its own class;
the CLI maps each class to a distinct exit code.
"""


class AsdimError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class BudgetExceeded(AsdimError):
    """An enumeration grew past its configured element cap."""

    exit_code = 3


class SearchTimeout(AsdimError):
    exit_code = 4


class ValidationError(AsdimError):
    """Parameters or inputs violate an operation's preconditions."""

    exit_code = 2


class NotACover(AsdimError):
    exit_code = 5


class ColoringFailure(AsdimError):
    exit_code = 6


class HypothesisFailure(AsdimError):
    """A structural hypothesis of a construction failed on the given data.

    ``label`` names the failed condition so callers can report it.
    """

    exit_code = 7

    def __init__(self, label, message=""):
        super().__init__(f"{label}: {message}" if message else label)
        self.label = label


class OracleFailure(AsdimError):
    exit_code = 8


class VerificationFailure(AsdimError):
    exit_code = 9


class ParseError(AsdimError):
    """An input file is missing, unreadable or not well-formed."""

    exit_code = 10
