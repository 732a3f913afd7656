"""Exception types shared across the toolkit."""


class FactOrderingError(Exception):
    """Base class for every error raised by this package."""


class CatalogError(FactOrderingError):
    """Invalid catalog construction (duplicate or empty type names)."""


class UnknownTypeError(FactOrderingError):
    """A fact-type name or id is not part of the governing catalog."""


class DuplicateFactError(FactOrderingError):
    """The same fact type appears more than once in an input set."""


class ContractError(FactOrderingError):
    """A caller violated an operation precondition (stage, width, alignment)."""


class EncodingError(FactOrderingError):
    """Inconsistent encoder input, e.g. remaining facts overlap the prefix."""


class TrainingError(FactOrderingError):
    """Training cannot proceed (empty or invalid training data)."""


class ConfigurationError(FactOrderingError):
    """Invalid scheme, parameter, canonical order, or fold configuration."""


class PredictionError(FactOrderingError):
    """Prediction was requested with no legal class available."""


class InputError(FactOrderingError):
    """A fact set handed to a planner does not fit it (size or unknown ids)."""


class DataFormatError(FactOrderingError):
    """A dataset or schema file cannot be parsed.

    ``line`` carries the 1-based offending line for line-oriented files.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DeserializationError(FactOrderingError):
    """A persisted planner or model payload is malformed."""


class CompatibilityError(FactOrderingError):
    """A planner was applied to facts governed by a different catalog."""
