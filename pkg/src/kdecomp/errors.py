"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`KdecompError`, so callers (and the CLI) can catch one type.
"""


class KdecompError(Exception):
    """Base class for all package errors."""


class DomainError(KdecompError, ValueError):
    """Argument outside the mathematical domain of a function."""


class BracketError(KdecompError, ValueError):
    """Root-finding bracket does not contain a sign change."""


class ConvergenceError(KdecompError, ArithmeticError):
    """Iteration or subdivision budget exhausted."""


class ValidationError(KdecompError, ValueError):
    """Input violates a type invariant or precondition."""


class ParameterizationError(ValidationError):
    """Kernel parameters cannot be realized for the requested mode and spread."""


class DegenerateDataError(ValidationError):
    """Data too degenerate for a data-driven rule (e.g. zero variance)."""


class TestPreconditionError(ValidationError):
    """Equality-of-proportions test needs at least two components and two quantiles."""

    __test__ = False  # keep pytest from collecting this class


class DegenerateCategoryError(ValidationError):
    """A component has zero null weight, so its expected share is zero."""


class SchemaError(ValidationError):
    """Input file does not match the declared schema."""


class RowError(ValidationError):
    """A single input row could not be parsed."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BinningError(ValidationError):
    """A value matched no category and the binning has no overflow category."""
