"""Exception types raised across the package."""


class LLLError(Exception):
    """Base class for all errors raised by mtlll."""


class InputError(LLLError, ValueError):
    """Malformed or out-of-range input (bad ids, invalid parameters, improper trees)."""


class CapExceededError(LLLError):
    """An exact computation would exceed its configured size cap."""


class ParseError(InputError):
    """A text format could not be parsed. Carries the offending line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
