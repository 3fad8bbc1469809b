"""Uniform completion interface over interchangeable providers.

The gateway owns retries, the parallelism bound and the budget precondition;
providers only turn prompt text into completion text.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Protocol

import httpx

from .errors import (
    GatewayError,
    PromptTooLargeError,
    ProviderAuthenticationError,
    ProviderQuotaError,
    RetriesExhaustedError,
    TransientProviderError,
)
from .groundtruth import load_repo_dir
from .model import DocumentationSource, DocumentationType, Scope, StructuredDoc, fingerprint
from .promptkit import DEFAULT_BUDGET_CHARS, PromptText

logger = logging.getLogger(__name__)

LLM_KEY_ENV = "DOCFORGE_LLM_KEY"
REPAIR_INSTRUCTION = "Return only valid json matching the previous output format."


@dataclass(frozen=True)
class ModelConfig:
    provider_id: str = "mock"
    model_id: str = "mock-model"
    context_budget_chars: int = DEFAULT_BUDGET_CHARS
    temperature: float = 0.0
    max_output_chars: int = 16_000
    request_timeout: float = 60.0
    max_attempts: int = 5
    backoff_base: float = 1.0
    backoff_factor: float = 2.0

    def __post_init__(self):
        if self.context_budget_chars <= 0:
            raise ValueError("context_budget_chars must be positive")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class RawCompletion:
    text: str
    provider_latency: float
    attempts_used: int
    model_id: str


class Provider(Protocol):
    def send(self, prompt: str, cfg: ModelConfig) -> str: ...


class LLMGateway:
    """Thread-safe front door to a provider, bounded to ``parallelism`` in-flight calls."""

    def __init__(self, provider: Provider, parallelism: int = 5, sleep=time.sleep):
        if parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        self.provider = provider
        self.parallelism = parallelism
        self._slots = threading.BoundedSemaphore(parallelism)
        self._sleep = sleep
        self._lock = threading.Lock()
        self.in_flight = 0
        self.max_in_flight = 0
        self.requests_sent = 0

    def _send(self, text: str, cfg: ModelConfig) -> str:
        with self._slots:
            with self._lock:
                self.in_flight += 1
                self.requests_sent += 1
                self.max_in_flight = max(self.max_in_flight, self.in_flight)
            try:
                return self.provider.send(text, cfg)
            finally:
                with self._lock:
                    self.in_flight -= 1

    def complete(self, prompt: PromptText, cfg: ModelConfig) -> RawCompletion:
        if len(prompt.text) > cfg.context_budget_chars:
            raise PromptTooLargeError(
                f"prompt of {len(prompt.text)} chars exceeds budget of {cfg.context_budget_chars}"
            )
        started = time.monotonic()
        last_error: Exception | None = None
        for attempt in range(1, cfg.max_attempts + 1):
            try:
                text = self._send(prompt.text, cfg)
            except TransientProviderError as exc:
                last_error = exc
                if attempt < cfg.max_attempts:
                    delay = cfg.backoff_base * cfg.backoff_factor ** (attempt - 1)
                    logger.warning("transient provider failure (%s); retry %d in %.1fs", exc, attempt, delay)
                    self._sleep(delay)
                continue
            return RawCompletion(text, time.monotonic() - started, attempt, cfg.model_id)
        raise RetriesExhaustedError(cfg.max_attempts, last_error)


class MockFault(str, Enum):
    """Scripted misbehaviour for one (type, source) key of the mock provider."""

    # prose around a JSON body cut off mid-way; the repair call gets clean JSON
    PROSE_WRAPPED = "prose_wrapped"
    # JSON that violates the entry schema; the repair call gets clean JSON
    INVALID_SCHEMA = "invalid_schema"
    # no JSON at all, on every call including the repair
    GARBLED = "garbled"


def _detect_key(prompt: str) -> tuple[DocumentationType, DocumentationSource | None] | None:
    # the first exemplar output names the type and scope being asked for
    for line in prompt.split("\n"):
        if not line.startswith("Output: {"):
            continue
        try:
            data = json.loads(line[len("Output: "):])
            return DocumentationType(data["doc_type"]), Scope.from_json(data["scope"]).source
        except (ValueError, KeyError, TypeError):
            continue
    return None


class MockProvider:
    """Deterministic offline provider answering from a table of canned documents.

    The reply depends only on the prompt text. One prompt in ten (by
    fingerprint) gets its JSON wrapped in chatty prose, which extraction must
    see through.
    """

    def __init__(self, fixtures: dict | None = None, faults: dict | None = None, wrap_modulus: int = 10):
        self.fixtures: dict[tuple[DocumentationType, DocumentationSource | None], StructuredDoc] = dict(fixtures or {})
        self.faults: dict[tuple[DocumentationType, DocumentationSource | None], MockFault] = dict(faults or {})
        self.wrap_modulus = wrap_modulus

    @classmethod
    def from_dir(cls, repo_dir: str | Path, **kwargs) -> "MockProvider":
        """Load canned documents from one repository directory in groundtruth layout."""
        gt = load_repo_dir(Path(repo_dir))
        fixtures = {(t, s): d for (t, s), d in gt.intermediates.items()}
        fixtures.update({(t, None): d for t, d in gt.finals.items()})
        return cls(fixtures, **kwargs)

    def canned(self, doc_type: DocumentationType, source: DocumentationSource | None) -> dict:
        doc = self.fixtures.get((doc_type, source))
        if doc is None:
            scope = Scope(source)
            return {"doc_type": doc_type.value, "scope": scope.to_json(), "entries": []}
        return doc.payload()

    def send(self, prompt: str, cfg: ModelConfig) -> str:
        key = _detect_key(prompt)
        if key is None:
            return "I could not find any examples to follow in this prompt."
        body = json.dumps(self.canned(*key), ensure_ascii=False, indent=2)
        is_repair = prompt.rstrip().endswith(REPAIR_INSTRUCTION)
        fault = self.faults.get(key)
        if fault is MockFault.GARBLED:
            return "The inputs discuss several topics, but nothing I can summarise as requested."
        if fault is MockFault.PROSE_WRAPPED and not is_repair:
            return f"Sure! Here is the documentation you asked for:\n{body[: len(body) // 2]}\n...and so on."
        if fault is MockFault.INVALID_SCHEMA and not is_repair:
            return json.dumps({"doc_type": key[0].value, "entries": [{"unexpected": True}]})
        if int(fingerprint(prompt), 16) % self.wrap_modulus == 0:
            return f"Here is the output in the requested format:\n```json\n{body}\n```\nHope this helps!"
        return body


class HttpProvider:
    """POSTs ``{model, prompt, temperature, max_output}`` and reads ``{text}`` back."""

    def __init__(self, base_url: str, api_key: str | None = None,
                 transport: httpx.BaseTransport | None = None):
        key = api_key if api_key is not None else os.environ.get(LLM_KEY_ENV)
        headers = {"Authorization": f"Bearer {key}"} if key else {}
        self._http = httpx.Client(headers=headers, transport=transport)
        self.base_url = base_url

    def send(self, prompt: str, cfg: ModelConfig) -> str:
        payload = {
            "model": cfg.model_id,
            "prompt": prompt,
            "temperature": cfg.temperature,
            "max_output": cfg.max_output_chars,
        }
        try:
            response = self._http.post(self.base_url, json=payload, timeout=cfg.request_timeout)
        except httpx.TransportError as exc:
            raise TransientProviderError(f"transport error: {exc}") from exc
        status = response.status_code
        if status in (401, 403):
            raise ProviderAuthenticationError(f"provider rejected credentials (HTTP {status})")
        if status == 402 or (status == 429 and "quota" in response.text.lower()):
            raise ProviderQuotaError(f"provider quota exhausted (HTTP {status})")
        if status == 429 or status >= 500:
            raise TransientProviderError(f"HTTP {status}")
        if status >= 400:
            raise GatewayError(f"provider refused request (HTTP {status}): {response.text[:200]}")
        try:
            return response.json()["text"]
        except (ValueError, KeyError, TypeError) as exc:
            raise TransientProviderError(f"malformed provider response: {exc}") from exc
