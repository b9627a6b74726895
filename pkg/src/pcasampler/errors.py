"""Exception hierarchy shared by the library and the CLI."""


class PCAError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(PCAError, ValueError):
    """A caller passed a value outside an operation's domain."""


class InvalidStateError(PCAError, ValueError):
    """A chain state violates a sampler precondition."""


class ParseError(PCAError, ValueError):
    """A model file or config could not be parsed.

    ``line`` is the 1-based line number when the failure is tied to one.
    """

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ResourceCapError(PCAError):
    """Exhaustive enumeration was requested beyond the configured size cap."""


class DivergenceError(PCAError, ArithmeticError):
    """A Neumann series was requested for a matrix with row sum >= 1."""


class NotApplicableError(PCAError):
    """A bound or prediction was requested outside its range of validity."""
