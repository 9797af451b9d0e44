"""Exception hierarchy shared across the package.

Every error carries a machine-readable ``code`` and, where it makes sense,
the name of the offending field so the HTTP layer can emit structured
error bodies without string matching.
"""

from __future__ import annotations


class GridSankeyError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str, *, field: str | None = None):
        super().__init__(message)
        self.field = field


class ParseError(GridSankeyError):
    """Malformed run, qrels, or score-CSV content."""

    code = "parse_error"

    def __init__(self, message: str, *, line_no: int | None = None, field: str | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message, field=field)
        self.line_no = line_no


class ManifestError(GridSankeyError):
    code = "manifest_error"


class DataError(GridSankeyError):
    """Fatal data problems: unreadable qrels, zero runs, empty views."""

    code = "data_error"


class UnknownAxisError(GridSankeyError):
    code = "unknown_axis"


class UnknownLevelError(GridSankeyError):
    code = "unknown_level"


class HiddenLevelError(GridSankeyError):
    """The level exists but is filtered out of the current view."""

    code = "hidden_level"


class UnknownMeasureError(GridSankeyError):
    code = "unknown_measure"


class UnknownTopicError(GridSankeyError):
    code = "unknown_topic"


class EmptyAxisError(GridSankeyError):
    """Rejecting a filter change that would leave an axis with no levels."""

    code = "empty_axis"


class InsufficientTopicsError(GridSankeyError):
    code = "insufficient_topics"


class ConfigError(GridSankeyError):
    code = "config_error"


class UnknownCollectionError(GridSankeyError):
    code = "unknown_collection"


class NotAdjacentError(GridSankeyError):
    """Link statistics asked for two axes that are not neighbours in the
    request's axis order."""

    code = "not_adjacent"


class BadRequestError(GridSankeyError):
    """Structurally invalid request body or query parameter."""

    code = "bad_request"


class LoadingError(GridSankeyError):
    """Grids are still being loaded; retry later (HTTP 503)."""

    code = "loading"
