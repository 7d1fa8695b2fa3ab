"""Exception hierarchy shared by every module in the package."""


class PcmError(Exception):
    """Base class for all errors raised by pcmfill."""


class DomainError(PcmError, ValueError):
    """An argument lies outside the domain of an operation."""


class ParseError(DomainError):
    """Malformed matrix text. ``line`` and ``column`` are 1-based."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ReciprocityError(DomainError):
    """A pair of cells violates ``a_ji * a_ij = 1``. ``cell`` is 1-based."""

    def __init__(self, message, cell):
        self.cell = cell
        super().__init__(message)


class PreconditionError(DomainError):
    """Input does not satisfy the structural precondition of a fast path."""


class NonUniqueError(PcmError):
    """The comparison graph is disconnected, so the optimum is not unique."""


class ConfigurationError(PcmError):
    """Missing table entries or impossible experiment settings."""


class NumericError(PcmError, ArithmeticError):
    """An iterative numerical routine failed to converge."""


class GenerationLimitError(PcmError):
    """A simulation hit its generation cap before collecting enough samples."""
