import json
import time
from concurrent.futures import ThreadPoolExecutor

import httpx
import pytest

from docforge.errors import (
    ExtractionError,
    GatewayError,
    PromptTooLargeError,
    ProviderAuthenticationError,
    ProviderQuotaError,
    RetriesExhaustedError,
    TransientProviderError,
)
from docforge.gateway import REPAIR_INSTRUCTION, HttpProvider, LLMGateway, MockFault, MockProvider, ModelConfig
from docforge.jsonextract import extract_json
from docforge.model import DocumentationSource, DocumentationType, Scope, StructuredDoc
from docforge.promptkit import make_prompt

CFG = ModelConfig(max_attempts=3)
API, ISSUES = DocumentationType.API, DocumentationSource.ISSUES


class Flaky:
    def __init__(self, failures, exc=TransientProviderError):
        self.failures, self.exc, self.calls = failures, exc, 0

    def send(self, prompt, cfg):
        self.calls += 1
        if self.calls <= self.failures:
            raise self.exc("boom")
        return "ok"


def test_retries_then_succeeds():
    sleeps = []
    gw = LLMGateway(Flaky(2), sleep=sleeps.append)
    out = gw.complete(make_prompt("hi", 100), CFG)
    assert out.text == "ok" and out.attempts_used == 3 and sleeps == [1.0, 2.0]


def test_retries_exhausted():
    gw = LLMGateway(Flaky(10), sleep=lambda s: None)
    with pytest.raises(RetriesExhaustedError) as info:
        gw.complete(make_prompt("hi", 100), CFG)
    assert info.value.attempts == 3


@pytest.mark.parametrize("exc", [ProviderAuthenticationError, ProviderQuotaError])
def test_terminal_errors_are_not_retried(exc):
    provider = Flaky(10, exc)
    with pytest.raises(exc):
        LLMGateway(provider, sleep=lambda s: None).complete(make_prompt("hi", 100), CFG)
    assert provider.calls == 1


def test_oversized_prompt_never_sent():
    provider = Flaky(0)
    prompt = make_prompt("x" * 50, 100)
    with pytest.raises(PromptTooLargeError):
        LLMGateway(provider).complete(prompt, ModelConfig(context_budget_chars=10))
    assert provider.calls == 0


def test_parallelism_bound():
    class Slow:
        def send(self, prompt, cfg):
            time.sleep(0.02)
            return "ok"

    gw = LLMGateway(Slow(), parallelism=3)
    with ThreadPoolExecutor(10) as pool:
        list(pool.map(lambda _: gw.complete(make_prompt("p", 10), CFG), range(12)))
    assert gw.max_in_flight == 3 and gw.requests_sent == 12 and gw.in_flight == 0


def _prompt_for(doc_type, source):
    marker = json.dumps({"doc_type": doc_type.value, "scope": Scope(source).to_json(), "entries": []})
    return f"instruction\nInput: x\nOutput: {marker}\nInput: y\nOutput:"


def fixture_doc():
    return StructuredDoc(API, Scope.single(ISSUES), [{"name": "A", "description": "d", "members": [],
                                                      "source_refs": []}])


def test_mock_answers_from_fixture_and_is_pure():
    mock = MockProvider({(API, ISSUES): fixture_doc()})
    prompt = _prompt_for(API, ISSUES)
    first, second = mock.send(prompt, CFG), mock.send(prompt, CFG)
    assert first == second
    assert extract_json(first)["entries"] == list(fixture_doc().entries)


def test_mock_unknown_key_gives_empty_doc():
    out = extract_json(MockProvider().send(_prompt_for(API, ISSUES), CFG))
    assert out["entries"] == [] and out["doc_type"] == "api"


def test_mock_wraps_some_prompts_in_prose():
    mock = MockProvider({(API, ISSUES): fixture_doc()}, wrap_modulus=1)
    out = mock.send(_prompt_for(API, ISSUES), CFG)
    assert out.startswith("Here is") and extract_json(out)["doc_type"] == "api"


def test_mock_faults():
    key = (API, ISSUES)
    prompt = _prompt_for(*key)
    repair = prompt + "\n" + REPAIR_INSTRUCTION
    wrapped = MockProvider({key: fixture_doc()}, {key: MockFault.PROSE_WRAPPED})
    # the cut-off body may still contain a balanced fragment, but never a whole document
    try:
        partial = extract_json(wrapped.send(prompt, CFG))
    except ExtractionError:
        partial = None
    assert not (isinstance(partial, dict) and "entries" in partial)
    assert extract_json(wrapped.send(repair, CFG))["entries"]
    garbled = MockProvider({key: fixture_doc()}, {key: MockFault.GARBLED})
    with pytest.raises(ExtractionError):
        extract_json(garbled.send(repair, CFG))


def test_http_provider_protocol(monkeypatch):
    seen = {}

    def handler(request):
        seen["auth"] = request.headers.get("authorization")
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json={"text": "answer"})

    monkeypatch.setenv("DOCFORGE_LLM_KEY", "sekret")
    provider = HttpProvider("https://llm.invalid/v1/complete", transport=httpx.MockTransport(handler))
    assert provider.send("hello", CFG) == "answer"
    assert seen["auth"] == "Bearer sekret"
    assert seen["body"] == {"model": "mock-model", "prompt": "hello", "temperature": 0.0, "max_output": 16000}


@pytest.mark.parametrize("status,body,exc", [
    (401, "", ProviderAuthenticationError),
    (402, "", ProviderQuotaError),
    (429, "daily quota exceeded", ProviderQuotaError),
    (429, "slow down", TransientProviderError),
    (503, "", TransientProviderError),
    (400, "bad", GatewayError),
])
def test_http_provider_error_mapping(status, body, exc):
    provider = HttpProvider("https://llm.invalid", api_key="k",
                            transport=httpx.MockTransport(lambda r: httpx.Response(status, text=body)))
    with pytest.raises(exc):
        provider.send("p", CFG)
