"""Exception types shared across the package."""


class CiterankError(Exception):
    """Base class for all errors raised by citerank."""


class SchemaError(CiterankError):
    """A required column is missing or the schema itself is malformed."""


class RowParseError(CiterankError):
    """A data row could not be parsed; carries the offending row number."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class DuplicateIdError(CiterankError):
    """Two rows share the same paper identifier."""


class EmptyCorpusError(CiterankError):
    """An operation that needs at least one paper got none."""


class UnknownGroupError(CiterankError, KeyError):
    """A group label is not present in the corpus."""


class DomainError(CiterankError, ValueError):
    """A numeric argument is outside its valid domain."""


class DegenerateAnchorError(DomainError):
    """The two anchors of a power-law reference coincide."""


class InsufficientDataError(CiterankError):
    """Not enough data points to carry out the computation."""


class InsufficientVarianceError(InsufficientDataError):
    """All values identical: a spread parameter cannot be estimated."""


class ScalingError(CiterankError):
    """Histogram scaling is impossible (zero weight in the anchor bin)."""


class ConstructionError(CiterankError):
    """A synthetic corpus specification cannot be realized."""
