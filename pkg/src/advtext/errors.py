"""Exception hierarchy shared across the package."""


class AdvTextError(Exception):
    """Base class for all package-specific errors."""


class InvalidConfigError(AdvTextError):
    """A configuration value is out of its legal range."""


class ShapeError(AdvTextError):
    """Array shapes do not agree with the model dimensions."""


class NumericOverflowError(AdvTextError):
    """A non-finite value appeared during a numeric computation."""


class EmptyVocabularyError(AdvTextError):
    """Vocabulary construction produced no tokens."""


class InvalidIdError(AdvTextError):
    """A token id is outside the vocabulary range."""


class EmptySplitError(AdvTextError):
    """A dataset split contains no examples."""


class EmptyInputError(AdvTextError):
    """An operation that needs at least one sequence received none."""


class PairingError(AdvTextError):
    """Two sequence sets that must be paired have different sizes."""


class DegenerateEmbeddingError(AdvTextError):
    """An embedding row is all zeros and has no direction."""


class StaleIndexError(AdvTextError):
    """A neighbor index was built from a different embedding snapshot."""


class InvalidCheckpointError(AdvTextError):
    """A checkpoint file is malformed or its dimensions do not match."""


class UsageError(AdvTextError):
    """An unsupported option was requested (e.g. an unknown report format)."""


class SchemaError(AdvTextError):
    """A report JSON document does not match the documented schema."""
