"""Diagnostics and the domain error type shared by every module."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    line: Optional[int] = None
    column: Optional[int] = None

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def __str__(self) -> str:
        loc = ""
        if self.line is not None:
            loc = f"{self.line}:{self.column or 1}: "
        return f"{loc}{self.severity} {self.code}: {self.message}"


def error(code: str, message: str, line: Optional[int] = None, column: Optional[int] = None) -> Diagnostic:
    return Diagnostic("error", code, message, line, column)


def warning(code: str, message: str, line: Optional[int] = None, column: Optional[int] = None) -> Diagnostic:
    return Diagnostic("warning", code, message, line, column)


def count_errors(diagnostics: Iterable[Diagnostic]) -> int:
    return sum(1 for d in diagnostics if d.is_error)


class LPForgeError(Exception):
    """Domain failure with a stable error code.

    ``diagnostics`` carries line-level findings when the failure came from
    parsing or validation.
    """

    def __init__(self, code: str, message: str = "", diagnostics: Iterable[Diagnostic] = ()):
        self.code = code
        self.message = message or code
        self.diagnostics = tuple(diagnostics)
        super().__init__(f"{code}: {self.message}")
