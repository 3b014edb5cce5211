"""
Error types shared by the model checker.

Diagnostics carry a path into the model document and, when known, the
line/column of the offending declaration.
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

Loc = Tuple[Union[str, int], ...]


def format_loc(loc: Loc) -> str:
    """Render a document path like ``actors[2].location``."""
    text = ""
    for part in loc:
        if isinstance(part, int):
            text += f"[{part}]"
        elif text:
            text += f".{part}"
        else:
            text = str(part)
    return text or "<document>"


@dataclass(frozen=True)
class Diagnostic:
    """One positioned problem found while reading or validating a model."""

    loc: Loc
    message: str
    line: Optional[int] = None
    column: Optional[int] = None

    @property
    def path(self) -> str:
        return format_loc(self.loc)

    def at(self, line: Optional[int], column: Optional[int]) -> "Diagnostic":
        return replace(self, line=line, column=column)

    def __str__(self) -> str:
        position = f"{self.line}:{self.column}: " if self.line is not None else ""
        return f"{position}{self.path}: {self.message}"


class CheckerError(Exception):
    """Base class for all checker errors."""


class _DiagnosticError(CheckerError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics: List[Diagnostic] = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class ModelFileError(_DiagnosticError):
    """Syntax errors, duplicate declarations, unknown keys or missing sections."""


class ModelValidationError(_DiagnosticError):
    """Cross-reference or invariant failures in a parsed model."""


class QueryError(CheckerError):
    """A query or attack definition is malformed or references something unknown."""


class TruncatedModelError(CheckerError):
    """Raised when an operation needs a completely explored model."""
