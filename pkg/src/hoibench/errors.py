"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Input data violates a documented contract."""


class ParseError(ValidationError):
    """A record could not be parsed; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownCorruptionError(ValueError):
    """Corruption kind not present in the 20-kind registry."""


class EmptyMaskError(ValueError):
    """Operation requires a non-empty instance mask."""


class DegenerateGeometryError(ValueError):
    """Hull polygon has zero area and cannot be scaled."""


class UndefinedBaselineError(ValueError):
    """Relative change is undefined for a non-positive baseline score."""


class InvalidLevelError(ValueError):
    """Masking level outside the candidate set for this operation."""
