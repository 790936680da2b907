"""Exception hierarchy shared by every docrec module."""


class DocrecError(Exception):
    """Base class for all errors raised by docrec."""


class InvalidLabelError(DocrecError, ValueError):
    """A target token is not part of the alphabet."""


class InfeasibleAlignmentError(DocrecError, ValueError):
    """The lattice has fewer frames than the shortest valid CTC path."""


class LatticeValidationError(DocrecError, ValueError):
    """A probability lattice has the wrong shape or non-distribution rows."""


class InstanceTooLargeError(DocrecError, ValueError):
    """A brute-force oracle was asked to enumerate too many paths."""


class ConfigurationError(DocrecError, ValueError):
    pass


class UndefinedMetricError(DocrecError, ValueError):
    """The metric normalizer is zero (e.g. empty ground truth)."""


class GrammarError(DocrecError, ValueError):
    """A layout token sequence does not parse under the schema."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class SearchBudgetExceeded(DocrecError, RuntimeError):
    """Exact graph edit distance search ran out of expansions."""

    def __init__(self, message, lower_bound, upper_bound):
        super().__init__(message)
        self.lower_bound = lower_bound
        self.upper_bound = upper_bound


class ShapeError(DocrecError, ValueError):
    pass


class FontError(DocrecError, ValueError):
    """Text contains characters that no available font can render."""


class GenerationError(DocrecError, RuntimeError):
    """Synthetic document generation could not place an entity."""


class FormatError(DocrecError, ValueError):
    """Malformed lattice, schema or JSONL input."""
