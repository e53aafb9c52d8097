"""Exception hierarchy shared by every module."""

from __future__ import annotations


class StickyChaseError(Exception):
    """Base class for all engine errors."""


class ParseError(StickyChaseError):
    """A positioned error raised while reading program, query or instance text."""

    kind = "syntax error"

    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = "<string>"):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self.__str__())

    def __str__(self) -> str:
        return f"{self.source}:{self.line}:{self.column}: {self.kind}: {self.message}"


class ArityMismatch(ParseError):
    kind = "arity mismatch"


class ExistentialInBody(ParseError):
    kind = "existential variable in body"


class UnsafeHeadVariable(ParseError):
    kind = "unsafe head variable"


class UnsafeQuery(ParseError):
    kind = "unsafe query"


class UnboundVariable(StickyChaseError):
    """An assignment was applied to an atom containing a variable outside its domain."""


class UnknownAtom(StickyChaseError):
    """An atom was looked up in a derivation relation that never saw it."""


class UnknownPosition(StickyChaseError):
    """An oracle selection mentioned a position absent from the program."""


class NotInClass(StickyChaseError):
    """Strict query answering refuted membership of the program in the selected class."""

    def __init__(self, message: str, witnesses: tuple = ()):
        self.witnesses = witnesses
        super().__init__(message)
