"""Exception types raised by the toolkit.

Library code raises these; the command line layer turns them into click errors
with the documented exit codes.
"""

from __future__ import annotations

from collections.abc import Iterable


class IgnoranceToolkitError(Exception):
    """Base class for every error raised by this package."""


class FormulaSyntaxError(IgnoranceToolkitError, ValueError):
    """A formula text does not match the grammar."""

    def __init__(
        self,
        message: str,
        *,
        line: int,
        column: int,
        expected: Iterable[str] = (),
    ) -> None:
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        detail = f"{message} at line {line}, column {column}"
        if self.expected:
            detail += f"; expected one of: {', '.join(sorted(self.expected))}"
        super().__init__(detail)


class ModelFileError(IgnoranceToolkitError, ValueError):
    """A model or frame document is malformed."""


class BudgetExceededError(IgnoranceToolkitError, RuntimeError):
    """An enumeration or truth-table guard was exceeded."""


class ProofScriptError(IgnoranceToolkitError, ValueError):
    """A proof script line cannot be read."""

    def __init__(self, message: str, *, line_number: int) -> None:
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class FixtureError(IgnoranceToolkitError, LookupError):
    """A fixture id is unknown or its file is missing."""
