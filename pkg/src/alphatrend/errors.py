"""Exception hierarchy shared across the package.

Everything raised on purpose derives from :class:`AlphaTrendError` so
callers (and the CLI) can distinguish anticipated failures from bugs.
"""

from __future__ import annotations


class AlphaTrendError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(AlphaTrendError):
    """A required column or config key is missing or malformed."""


class CsvParseError(AlphaTrendError):
    """A CSV row could not be parsed.

    Carries the offending path and 1-based line number so the message
    points at the exact spot in the input file.
    """

    def __init__(self, path: str, line_no: int, reason: str):
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{path}:{line_no}: {reason}")


class IntegrityError(AlphaTrendError):
    """Data violates a structural invariant (duplicate dates, bad bars)."""


class EmptyPanelError(AlphaTrendError):
    """An operation produced or received a panel with no rows."""


class FetchError(AlphaTrendError):
    """A remote download failed."""

    def __init__(self, url: str, status: int | None, reason: str):
        self.url = url
        self.status = status
        self.reason = reason
        detail = f"HTTP {status}" if status is not None else "no response"
        super().__init__(f"fetch failed ({detail}) for {url}: {reason}")


class ExprSyntaxError(AlphaTrendError):
    """Lexing or parsing an expression failed.

    ``pos`` is the 0-based character offset into the source text.
    """

    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} (at offset {pos})")


class ShapeError(AlphaTrendError):
    """An expression combines incompatible shapes or unknown names."""


class CatalogError(AlphaTrendError):
    """A catalog file is malformed.

    ``line_no`` is the 1-based line where the problem was found.
    """

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        super().__init__(f"catalog line {line_no}: {reason}")


class FeatureComputationError(AlphaTrendError):
    """Evaluating a named catalog entry failed."""


class DegenerateDataError(AlphaTrendError):
    """Training data cannot support the requested operation."""


class ParameterError(AlphaTrendError):
    """A hyperparameter or argument is outside its valid range."""


class NotFittedError(AlphaTrendError):
    """predict was called before fit."""


class UndefinedMetricError(AlphaTrendError):
    """A metric has no defined value for the given inputs."""


class ConfigError(AlphaTrendError):
    """A run configuration file is invalid."""


class PersistenceError(AlphaTrendError):
    """A model file could not be read back."""
