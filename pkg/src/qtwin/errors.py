"""Exception hierarchy shared by the parser, validators, engine and CLI."""

from __future__ import annotations


class QTwinError(Exception):
    """Base class for all errors raised by qtwin."""

    exit_code = 1


class UsageError(QTwinError):
    exit_code = 2


class ParseError(QTwinError):
    """Malformed input text. Carries the 1-based line and column when known."""

    exit_code = 3

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class ValidationError(QTwinError):
    """Input parsed but violates a domain invariant."""

    exit_code = 4


class ResourceCapError(QTwinError):
    """A qubit, memory or size cap would be exceeded."""

    exit_code = 5
