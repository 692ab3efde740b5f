"""
🚨 Errors - Diagnostic Hierarchy
Every failure the toolchain reports, formatted as <file>:<line>:<col>: <kind>: <detail>
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional


@dataclass(frozen=True)
class Span:
    line: int = 0
    column: int = 0
    end_line: int = 0
    end_column: int = 0

    @property
    def known(self) -> bool:
        return self.line > 0

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


NO_SPAN = Span()


class QttError(Exception):
    """Base class; `kind` names the diagnostic in formatted output"""

    kind = "Error"

    def __init__(self, detail: str, span: Optional[Span] = None, file: Optional[str] = None):
        super().__init__(detail)
        self.detail = detail
        self.span = span or NO_SPAN
        self.file = file

    def located(self, span: Optional[Span] = None, file: Optional[str] = None) -> "QttError":
        """Attach a location if none is known yet"""
        if span is not None and not self.span.known:
            self.span = span
        if file is not None and self.file is None:
            self.file = file
        return self

    def format(self) -> str:
        where = self.file or "<input>"
        return f"{where}:{self.span.line}:{self.span.column}: {self.kind}: {self.detail}"

    def __str__(self) -> str:
        return self.format()


class ParseError(QttError):
    kind = "SyntaxError"

    def __init__(self, detail: str, span: Optional[Span] = None, expected: Iterable[str] = ()):
        self.expected = sorted(set(expected))
        if self.expected:
            detail = f"{detail}; expected one of: {', '.join(self.expected)}"
        super().__init__(detail, span)


class EmptyDoBlock(QttError):
    kind = "EmptyDoBlock"


class LoadError(QttError):
    kind = "LoadError"


class UnknownName(QttError):
    kind = "UnknownName"


class TypeMismatch(QttError):
    kind = "TypeMismatch"


class LinearityError(QttError):
    kind = "LinearityError"

    def __init__(self, name: str, uses: int, span: Optional[Span] = None):
        self.name = name
        self.uses = uses
        super().__init__(f"There are {uses} uses of linear name {name}", span)


class ErasedUsage(QttError):
    kind = "ErasedUsage"

    def __init__(self, name: str, span: Optional[Span] = None):
        self.name = name
        super().__init__(f"{name} is not available at run time", span)


class UnsolvedMeta(QttError):
    kind = "UnsolvedMeta"


class NotAFunction(QttError):
    kind = "NotAFunction"


class UnifyError(QttError):
    """Raised by the unifier; the elaborator rewraps it as a TypeMismatch"""

    kind = "UnifyMismatch"


class OccursCheck(UnifyError):
    kind = "OccursCheck"


class NonPatternSpine(UnifyError):
    kind = "NonPatternSpine"


class AutoSearchFailure(QttError):
    kind = "AutoSearchFailure"

    def __init__(self, goal: str, span: Optional[Span] = None):
        self.goal = goal
        super().__init__(f"can't find an implementation for {goal}", span)


class InvalidConstructorReturnType(QttError):
    kind = "InvalidConstructorReturnType"


class PatternArityMismatch(QttError):
    kind = "PatternArityMismatch"


class CannotRefineNonVariableScrutinee(QttError):
    kind = "CannotRefineNonVariableScrutinee"


class UnknownHole(QttError):
    kind = "UnknownHole"


class ErasureLeak(QttError):
    kind = "ErasureLeak"


class RuntimeFailure(QttError):
    kind = "RuntimeError"


class Deadlock(RuntimeFailure):
    kind = "Deadlock"

    def __init__(self, blocked: Iterable[int]):
        self.blocked = sorted(blocked)
        ids = ", ".join(str(p) for p in self.blocked)
        super().__init__(f"all processes blocked; waiting: {ids}")


class PrimitiveError(RuntimeFailure):
    kind = "PrimitiveError"


class StaleWorld(RuntimeFailure):
    kind = "StaleWorld"


class SendOnClosed(RuntimeFailure):
    kind = "SendOnClosed"


class RecvOnClosed(RuntimeFailure):
    kind = "RecvOnClosed"


@dataclass
class Diagnostic:
    kind: str
    detail: str
    span: Span = NO_SPAN
    file: Optional[str] = None

    def format(self) -> str:
        return f"{self.file or '<input>'}:{self.span}: warning: {self.kind}: {self.detail}"
