"""Diagnostics shared by every stage of the pipeline.

All user-facing errors render as ``file:line:col: error[CODE]: message``
where CODE is the exception class name.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 0

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1 or self.length < 0:
            raise ValueError(f"invalid span {self.line}:{self.column}+{self.length}")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


NOWHERE = SourceSpan("<unknown>", 1, 1, 0)


class ComlangError(Exception):
    """Base class for every diagnostic the toolchain reports."""

    def __init__(self, message: str, span: SourceSpan | None = None):
        super().__init__(message)
        self.message = message
        self.span = span

    @property
    def code(self) -> str:
        return type(self).__name__

    def render(self) -> str:
        span = self.span or NOWHERE
        return f"{span}: error[{self.code}]: {self.message}"

    def __str__(self) -> str:
        return self.render()


# -- syntax -----------------------------------------------------------------

class LexError(ComlangError):
    pass


class ParseError(ComlangError):
    def __init__(self, message: str, span: SourceSpan, expected: frozenset[str] = frozenset()):
        super().__init__(message, span)
        self.expected = expected


# -- static semantics -------------------------------------------------------

class StaticError(ComlangError):
    """Any error detected before evaluation starts."""


class UnboundSignature(StaticError):
    pass


class DuplicateSignature(StaticError):
    pass


class DuplicateInterface(StaticError):
    pass


class TypeMismatch(StaticError):
    pass


class UnboundVariable(StaticError):
    pass


class UnboundComponent(StaticError):
    pass


class NoSuchInterface(StaticError):
    pass


class NoSuchMember(StaticError):
    pass


class MissingIID(StaticError):
    pass


class NotExportable(StaticError):
    def __init__(self, message: str, span: SourceSpan | None = None, violations: list[str] | None = None):
        super().__init__(message, span)
        self.violations = list(violations or [])


class NotExpressible(StaticError):
    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = list(violations or [])


# -- dynamic semantics ------------------------------------------------------

class RuntimeFault(ComlangError):
    """A fault raised while a program runs; the CLI maps these to exit code 3."""


class InstantiationFailure(RuntimeFault):
    pass


class SignatureMismatch(RuntimeFault):
    pass


class NegotiationFault(SignatureMismatch):
    def __init__(self, message: str, missing: list[str], span: SourceSpan | None = None):
        super().__init__(message, span)
        self.missing = list(missing)


class MarshalViolation(RuntimeFault):
    pass


class UnknownClsid(RuntimeFault):
    pass


class UnknownCharacterId(RuntimeFault):
    pass


class KernelFault(RuntimeFault):
    """Violations of the component kernel's own invariants."""


class OverRelease(KernelFault):
    pass


class SessionMismatch(KernelFault):
    pass


class ReclaimedInstance(KernelFault):
    pass


# -- registry ---------------------------------------------------------------

class ManifestError(RuntimeFault):
    pass


class ClsidCollision(RuntimeFault):
    pass
