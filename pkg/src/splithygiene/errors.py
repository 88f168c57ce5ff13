"""Exception types shared across the package."""


class SplitHygieneError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SplitHygieneError):
    """A query or corpus line is outside the supported format.

    ``position`` is a character offset when raised by the query parser and a
    zero-based line number when raised by corpus readers.
    """

    def __init__(self, position: int, message: str):
        super().__init__(f"position {position}: {message}")
        self.position = position
        self.message = message


class PatternError(SplitHygieneError):
    """A question pattern violates a structural rule."""


class AdjacentSlots(PatternError):
    """Two slots ended up next to each other with no word between them."""


class PlaceholderPredicate(SplitHygieneError):
    """A concrete predicate list was requested but a predicate is a placeholder."""


class LineCountMismatch(SplitHygieneError):
    """Parallel corpus files disagree on the number of lines."""


class UnlocatableEntity(SplitHygieneError):
    """No query IRI corresponds to a labeled surface-form span."""

    def __init__(self, label: str, message: str = ""):
        super().__init__(message or f"no query IRI matches the span for label {label!r}")
        self.label = label


class UnboundVariable(SplitHygieneError):
    """A selected variable never occurs in the query's triple patterns."""


class RatioError(SplitHygieneError):
    """Split ratios or a subsample fraction are out of range."""


class EmptyCorpus(SplitHygieneError):
    """An operation that needs at least one record received none."""


class InvalidLogProb(SplitHygieneError):
    """A log probability was positive or non-finite."""
