"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class TrapInvError(Exception):
    """Base class for every error raised by this package."""


class CapExceeded(TrapInvError):
    """A configured resource cap (minterms, variables, places, markings) was hit."""

    def __init__(self, what: str, limit: int, stage: str | None = None):
        self.what = what
        self.limit = limit
        self.stage = stage
        where = f" during {stage}" if stage else ""
        super().__init__(f"{what} exceeds the configured limit of {limit}{where}")


class UnboundVariable(TrapInvError, KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable {name!r}")

    def __str__(self) -> str:
        return self.args[0]


class NotPositive(TrapInvError, ValueError):
    """An operation defined only on positive formulae received a negative one."""


class ShapeError(TrapInvError, ValueError):
    """A formula is not in the syntactic shape an operation requires."""


class TypeMismatch(TrapInvError, ValueError):
    """A predicate or equality mixes index variables of different component types."""


class InputError(TrapInvError):
    """Malformed or semantically invalid system description."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        self.message = message
        loc = f"{line}:{column}: " if line is not None else ""
        super().__init__(loc + message)


class UnsafeNet(TrapInvError):
    """A reachable marking puts two tokens into one place."""
