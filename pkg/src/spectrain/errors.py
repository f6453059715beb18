"""Exception taxonomy shared by all spectrain modules."""


class SpectrainError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(SpectrainError):
    """Input violates a documented precondition (shape, range, emptiness)."""


class NumericalFailure(SpectrainError):
    """An iterative numerical procedure failed to converge."""


class DegenerateData(SpectrainError):
    """Data carries no usable structure (e.g. rank 0 after truncation)."""


class FormatError(SpectrainError):
    """A binary or text container does not match its declared format."""
