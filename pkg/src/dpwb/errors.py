"""Shared exception types for the workbench."""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class FormulaSyntaxError(WorkbenchError):
    """Malformed formula text.  Carries the source position when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class SortError(WorkbenchError):
    """A term or formula violates the sort discipline of the language."""


class PrecisionError(WorkbenchError):
    """Truncated arithmetic ran out of known digits.

    ``known_valuation`` is the first index at which the result is no longer
    determined: the true value is O(uniformizer^known_valuation).
    """

    def __init__(self, message: str, known_valuation: int | None = None):
        self.known_valuation = known_valuation
        super().__init__(message)


class OrdOfZeroError(WorkbenchError):
    """ord() was queried on the exact zero element."""


class CharacterPrecisionError(WorkbenchError):
    """Not enough digits to read a character value."""


class GraphWitnessError(WorkbenchError):
    """A graph-presented function had zero or several witnesses in its window."""


class UnresolvedError(WorkbenchError):
    """A computation required a definite verdict but got Unknown."""


class DomainError(WorkbenchError):
    """A point lies outside (or undecidably on the edge of) a declared domain."""


class BudgetError(WorkbenchError):
    """An enumeration exceeded its configured cell/tuple budget."""


class ResourceError(WorkbenchError):
    """An intermediate object exceeded a hard resource cap (e.g. moduli blowup)."""


class InputError(WorkbenchError):
    """Bad user input at the tool boundary (files, literals, flags)."""
