"""Exception taxonomy shared across the package.

Every error raised on purpose derives from ChronosError so callers (and the
CLI) can separate model-precondition failures from ordinary bugs.
"""

from __future__ import annotations


class ChronosError(Exception):
    """Base class for all deliberate failures."""


class DivergentMoment(ChronosError):
    """A requested expectation does not exist for the given tail index."""


class InvalidDeadline(ChronosError):
    """Deadline is not after the minimum execution time."""


class InvalidWindow(ChronosError):
    """Detection/kill times leave no room for a speculative attempt."""


class InvalidFloor(ChronosError):
    """Conditional tail floor lies below the distribution support."""


class QuadratureFailure(ChronosError):
    """Numerical integration diverged or failed to reach tolerance."""


class NoProgress(ChronosError):
    """Completion estimate requested with no progress since first report."""


class InvalidTimes(ChronosError):
    """Timestamps passed to an estimator are out of order."""


class SearchCapReached(ChronosError):
    """Optimizer left the permitted search window [0, r_cap]."""


class DegenerateSample(ChronosError):
    """All samples identical; the tail index estimate is infinite."""


class InvalidRange(ChronosError):
    """A workload generation range is empty or out of domain."""


class SchemaMismatch(ChronosError):
    """CSV header does not match the expected schema."""


class ParseError(ChronosError):
    """A CSV row failed validation; carries line and column context."""

    def __init__(self, line: int, column: str, reason: str):
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"line {line}, column {column!r}: {reason}")


class IoError(ChronosError):
    """File could not be read or written."""
