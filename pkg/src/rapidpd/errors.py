"""Exception hierarchy.

Data problems (bad files, shape mismatches, dead captures) derive from
``DataError`` so the CLI can map them to one exit code.
"""


class RapidPDError(Exception):
    """Base class for all package errors."""


class DataError(RapidPDError, ValueError):
    """Input data cannot be processed as given."""


class ShapeError(DataError):
    """Array or frame dimensions disagree."""


class DomainError(RapidPDError, ValueError):
    """A physical or numerical parameter is outside its valid domain."""


class DegenerateFrameError(DataError):
    """A CSI entry has zero total amplitude and cannot be normalized."""

    def __init__(self, row: int, message: str | None = None):
        self.row = row
        super().__init__(message or f"row {row} has zero total amplitude (dead capture)")


class FlatSignalError(RapidPDError, ArithmeticError):
    """Zero-lag autocovariance is zero, so the ACF is undefined."""


class FormatError(DataError):
    """A CSI, label, or config file is malformed."""


class AlignmentError(DataError):
    """Verdicts and labels do not cover the same window indices."""


class SingleClassError(DataError):
    """ROC analysis needs both positive and negative samples."""


class InvariantViolation(RapidPDError, AssertionError):
    """An internal invariant failed; indicates a bug rather than bad input."""
