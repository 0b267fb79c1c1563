"""Exception types shared across the package.

The CLI maps these onto exit codes: input/parameter problems exit 2,
everything else raised at runtime exits 1.
"""


class EdgewatchError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(EdgewatchError, ValueError):
    """A value is outside its documented domain (bad eps, alpha, ...)."""


class ParseError(EdgewatchError, ValueError):
    """An input file could not be parsed.

    ``line`` is the 1-based line number of the first offending line,
    when known.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class OrderingError(EdgewatchError, ValueError):
    """Time ticks moved backwards.

    ``position`` is the 1-based line number (file input) or edge index
    (streaming input) where the violation was detected.
    """

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class LayoutMismatchError(EdgewatchError):
    """Sketches that must share a layout do not."""


class UnsupportedVariantError(EdgewatchError):
    """An operation was invoked on a detector variant that lacks it."""


class EvaluationError(EdgewatchError):
    """Evaluation inputs are unusable (length mismatch, single-class labels)."""
