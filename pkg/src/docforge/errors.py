"""Exception hierarchy shared by every docforge module."""

from __future__ import annotations


class DocforgeError(Exception):
    """Base class for all errors raised by docforge."""


class SchemaError(DocforgeError):
    """A structured document failed schema validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"schema violations: {lines}")


class GroundtruthError(DocforgeError):
    """A groundtruth fixture directory is malformed or incomplete."""


# ingestion


class FetchError(DocforgeError):
    """Base class for artifact fetching failures."""


class RetriableFetchError(FetchError):
    """Transient fetch failure (network, rate limit); carries the attempt count."""

    def __init__(self, message: str, attempts: int):
        self.attempts = attempts
        super().__init__(f"{message} (after {attempts} attempt(s))")


class FetchAuthenticationError(FetchError):
    """The hosting platform rejected the credentials."""


class RepositoryNotFoundError(FetchError):
    """The requested repository does not exist or is not visible."""


class MissingBundlesError(DocforgeError):
    """Offline mode was requested but the cache does not hold every source bundle."""

    def __init__(self, repo, sources):
        self.sources = list(sources)
        names = ", ".join(s.value for s in self.sources)
        super().__init__(f"no cached bundle for {repo}: {names}")


class CacheCorruptError(DocforgeError):
    def __init__(self, path, reason: str):
        self.path = path
        super().__init__(f"corrupt cache file {path}: {reason}")


# prompts


class BudgetError(DocforgeError):
    """A prompt cannot be made to fit the context budget."""


class PromptError(DocforgeError):
    """Prompt inputs are inconsistent (wrong type, missing intermediates)."""


class ShotSelectionError(DocforgeError):
    """Not enough donor repositories to draw exemplar shots from."""


# llm gateway


class GatewayError(DocforgeError):
    pass


class PromptTooLargeError(GatewayError):
    """Raised before sending: the prompt exceeds the model's context budget."""


class TransientProviderError(GatewayError):
    """A provider failure worth retrying (timeouts, 5xx, rate limiting)."""


class ProviderAuthenticationError(GatewayError):
    pass


class ProviderQuotaError(GatewayError):
    pass


class RetriesExhaustedError(GatewayError):
    def __init__(self, attempts: int, last_error: Exception | None):
        self.attempts = attempts
        self.last_error = last_error
        super().__init__(f"provider failed after {attempts} attempt(s): {last_error}")


# pipeline


class ExtractionError(DocforgeError):
    """No parseable JSON region was found in a completion."""

    def __init__(self, message: str, candidates: list[tuple[int, int]]):
        self.candidates = candidates
        super().__init__(message)


class PassFailure(DocforgeError):
    """A single level-1 or level-2 pass failed even after its repair attempt."""

    def __init__(self, label: str, reason: str, raw_texts: list[str]):
        self.label = label
        self.reason = reason
        self.raw_texts = list(raw_texts)
        super().__init__(f"pass {label!r} failed: {reason}")


class Level1Error(DocforgeError):
    """One or more level-1 passes failed; successful outputs are kept for diagnostics."""

    def __init__(self, failures: dict, succeeded: dict):
        self.failures = failures
        self.succeeded = succeeded
        names = ", ".join(s.value for s in failures)
        super().__init__(f"level-1 passes failed for: {names}")


class StageError(DocforgeError):
    """Wraps a failure with the pipeline stage it happened in."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
