from typing import Optional, Sequence


class GrammarError(ValueError):
    """Base class for problems found in grammar source or structure."""


class GrammarSyntaxError(GrammarError):
    """
    Grammar source could not be parsed.

    Args:
        message: What was expected or found
        line: 1-based line of the offending character
        column: 1-based column of the offending character
    """

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class DuplicateProductionError(GrammarError):
    def __init__(self, name: str, line: Optional[int] = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"Duplicate production: {name}{where}")
        self.name = name
        self.line = line


class GrammarValidationError(GrammarError):
    """Raised by compile steps that require a grammar without diagnostics."""

    def __init__(self, diagnostics: Sequence):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"Grammar is not compilable: {summary}")
