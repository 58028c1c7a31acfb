"""Exception types shared across the package."""


class MlarError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(MlarError):
    """A file or in-memory structure does not follow the expected shape."""


class ParseError(MlarError):
    """A formula string could not be parsed.

    ``position`` is the 0-based character offset of the offending token.
    """

    def __init__(self, message, position, text=""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class EvaluationError(MlarError):
    """A formula mentions something the model does not define."""


class InvariantError(MlarError):
    """An internal consistency check failed (for example a witness that
    does not re-verify)."""
