"""Exception hierarchy shared by every carbontag module."""


class CarbonTagError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CarbonTagError, ValueError):
    """An input value lies outside the mathematical domain of an operation."""


class ConfigError(CarbonTagError, ValueError):
    """A configuration document or parameter set is invalid."""


class SchemaError(CarbonTagError, ValueError):
    """An input file does not match the expected schema."""


class RowParseError(SchemaError):
    """A data row could not be parsed; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DataError(CarbonTagError, ValueError):
    """Structurally valid input whose content violates a data invariant."""


class UndefinedCorrelationError(DomainError):
    """Pearson correlation is undefined because an input vector is constant."""


class EmptySelectionError(CarbonTagError):
    """Feature selection rejected every candidate."""


class FeatureResolutionError(CarbonTagError, LookupError):
    """A model feature references a parameter missing from the input."""

    def __init__(self, factor: str):
        super().__init__(f"parameter not present in metrics: {factor!r}")
        self.factor = factor


class SingularDesignError(CarbonTagError):
    """The regression design matrix is rank deficient."""

    def __init__(self, dependent: list[str]):
        super().__init__(
            "design matrix is singular; linearly dependent columns: "
            + ", ".join(dependent)
        )
        self.dependent = list(dependent)


class InsufficientDataError(CarbonTagError):
    """Too few samples for the requested fit."""


class ArtifactError(CarbonTagError):
    """Base class for model-artifact serialization errors."""


class IntegrityError(ArtifactError):
    """Artifact bytes are corrupt or fail the checksum."""


class VersionError(ArtifactError):
    """Artifact declares an unsupported format version."""


class SizeBudgetError(ArtifactError):
    """Serialized artifact exceeds the size budget; carries the overshoot."""

    def __init__(self, size: int, budget: int):
        super().__init__(
            f"artifact is {size} bytes, exceeding the {budget}-byte budget "
            f"by {size - budget} bytes"
        )
        self.size = size
        self.budget = budget
        self.overshoot = size - budget
