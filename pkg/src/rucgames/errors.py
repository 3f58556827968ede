"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` (the class name) so the
CLI and the HTTP service can report failures uniformly.
"""

from __future__ import annotations


class RucError(Exception):
    """Base class for all package errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class InputError(RucError):
    """User-supplied data is malformed or out of contract (CLI exit code 2)."""


class NumericalError(RucError):
    """A numerical procedure failed to produce a certified result (CLI exit code 3)."""


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column

    def __str__(self) -> str:
        loc = ""
        if self.line is not None:
            loc = f" (line {self.line}" + (f", column {self.column}" if self.column is not None else "") + ")"
        return super().__str__() + loc


class DimensionMismatch(InputError):
    pass


class NotIrreducible(InputError):
    pass


class ZeroMatrix(InputError):
    pass


class NoConvergence(NumericalError):
    pass


class NotFullSupport(InputError):
    pass


class ZeroCollisionProbability(InputError):
    pass


class InsufficientDepth(InputError):
    pass


class InfinitePayoff(InputError):
    pass


class PreconditionViolated(InputError):
    pass


class ZeroColumn(InputError):
    pass


class TailUnderflow(NumericalError):
    pass


class OutOfRange(InputError):
    pass


class TooFewActions(InputError):
    pass


class ScriptedActionOutOfRange(InputError):
    pass


class UnsolvableSpec(InputError):
    pass


class UnknownSession(RucError):
    pass


class SessionFinished(RucError):
    pass


class ActionOutOfRange(RucError):
    pass
