"""Exception hierarchy shared across the package."""

from __future__ import annotations


class RubricLearnError(Exception):
    """Base class for all package errors."""


class CorpusError(RubricLearnError):
    """Corpus file cannot be loaded or violates an invariant."""


class SplitError(RubricLearnError):
    """Split ratios or split files are inconsistent with the corpus."""


class RubricError(RubricLearnError):
    """Rubric or criterion violates its schema."""


class ConfigError(RubricLearnError):
    """Run configuration is invalid; raised before any provider call."""


class ProviderError(RubricLearnError):
    """Base class for provider-side failures."""

    retryable = False


class TransientProviderError(ProviderError):
    """Transport-level failure worth retrying."""

    retryable = True


class AuthError(ProviderError):
    """Credential rejected; never retried."""


class ContentPolicyError(ProviderError):
    """Request refused on content grounds; never retried."""


class BudgetExceededError(ProviderError):
    """Token or request budget exhausted."""


class ExhaustedRetriesError(ProviderError):
    """All retry attempts failed; carries the last transport error."""

    def __init__(self, message: str, last_error: Exception | None = None):
        super().__init__(message)
        self.last_error = last_error


class EmbeddingError(ProviderError):
    """Embedding response is unusable (zero vector, wrong dimensionality)."""


class ExtractionError(RubricLearnError):
    """Model output could not be turned into the expected structure."""


class NoJsonFoundError(ExtractionError):
    """No top-level JSON object present in the model output."""


class SchemaViolationError(ExtractionError):
    """Parsed JSON misses a required key or holds an out-of-range value."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


class MockScriptError(RubricLearnError):
    """The mock provider has no script entry for a request."""


class RetrievalError(RubricLearnError):
    """Embedding index construction or querying failed."""


class EvaluationError(RubricLearnError):
    """A downstream evaluation (agreement, revision) could not complete."""
