"""Uniform chat/embedding access with retries, a parallelism cap, and journaling.

Two providers ship in the box: a deterministic scripted mock (the default;
see MockProvider for the script format) and an OpenAI-compatible HTTP
client for live runs. Every call appends one request record and one
terminal record to the run journal; raw response text is journaled verbatim
before any parsing happens.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    AuthError,
    BudgetExceededError,
    ContentPolicyError,
    EmbeddingError,
    ExhaustedRetriesError,
    ExtractionError,
    MockScriptError,
    ProviderError,
    TransientProviderError,
)
from .journal import Journal
from .structured import extract_json

PURPOSE_TAGS = ("learn", "generate", "judge", "refine", "localize", "agree", "revise")
REASONING_EFFORTS = ("low", "medium", "high", "none")
DEFAULT_EMBED_DIM = 3072
DEFAULT_MAX_OUTPUT = 16384

JSON_REMINDER = "Respond ONLY with JSON."


@dataclass(frozen=True)
class ChatRequest:
    system_text: str
    user_text: str
    tag: str
    temperature: float = 1.0
    reasoning_effort: str = "low"
    max_output: int = DEFAULT_MAX_OUTPUT
    lane: str | None = None


@dataclass(frozen=True)
class ProviderResponse:
    raw_text: str
    usage: dict
    latency: float
    attempts: int


@dataclass(frozen=True)
class EmbeddingRequest:
    text: str
    dimensionality: int = DEFAULT_EMBED_DIM


_ERROR_KINDS = {
    "transient": TransientProviderError,
    "auth": AuthError,
    "content_policy": ContentPolicyError,
    "budget": BudgetExceededError,
}


@dataclass
class MockEntry:
    """One scripted response.

    Match fields (``tag``, ``contains``, ``lane``, ``text``) must all hold
    for the entry to fire; entries are scanned in order and the first
    non-exhausted match wins. ``contains`` may be a single substring or a
    list of substrings that must all appear. ``uses=None`` means unlimited,
    which keeps matching stateless and resume-safe.
    """

    tag: str | None = None
    contains: str | list[str] | None = None
    lane: str | None = None
    text: str | None = None
    response: str | None = None
    vector: list | None = None
    error: str | None = None
    uses: int | None = None
    delay: float = 0.0

    def _contains_ok(self, haystack: str) -> bool:
        if self.contains is None:
            return True
        needles = [self.contains] if isinstance(self.contains, str) else self.contains
        return all(needle in haystack for needle in needles)

    def matches_chat(self, request: ChatRequest) -> bool:
        if self.vector is not None or self.text is not None:
            return False
        if self.tag is not None and self.tag != request.tag:
            return False
        if self.lane is not None and self.lane != request.lane:
            return False
        return self._contains_ok(request.user_text)

    def matches_embed(self, text: str) -> bool:
        if self.response is not None:
            return False
        if self.tag is not None and self.tag != "embed":
            return False
        if self.text is not None and self.text != text:
            return False
        return self._contains_ok(text)


def _default_embedding(text: str, dim: int) -> list[float]:
    """Deterministic pseudo-random unit direction derived from the text hash."""
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    rng = random.Random(int(digest[:16], 16))
    return [rng.gauss(0.0, 1.0) for _ in range(dim)]


class MockProvider:
    """Deterministic scripted provider with in-flight instrumentation.

    Chat requests must match a script entry; embedding requests fall back to
    a deterministic hash-derived vector when unscripted, so retrieval paths
    work without scripting every text.
    """

    def __init__(self, entries: list[MockEntry] | None = None):
        self.entries = list(entries or [])
        self._lock = threading.Lock()
        self._in_flight = 0
        self.max_in_flight = 0
        self.calls = 0

    @classmethod
    def from_script(cls, path: str | Path) -> "MockProvider":
        """Load a JSON-lines script: {"match": {...}, "response"/"vector"/"error": ..., "uses": n}."""
        entries = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            raw = json.loads(line)
            match = raw.get("match", {}) or {}
            entries.append(
                MockEntry(
                    tag=match.get("tag"),
                    contains=match.get("contains"),
                    lane=match.get("lane"),
                    text=match.get("text"),
                    response=raw.get("response"),
                    vector=raw.get("vector"),
                    error=raw.get("error"),
                    uses=raw.get("uses"),
                    delay=raw.get("delay", 0.0),
                )
            )
        return cls(entries)

    def _enter(self) -> None:
        with self._lock:
            self._in_flight += 1
            self.calls += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)

    def _exit(self) -> None:
        with self._lock:
            self._in_flight -= 1

    def _take(self, predicate) -> MockEntry:
        with self._lock:
            for entry in self.entries:
                if entry.uses is not None and entry.uses <= 0:
                    continue
                if predicate(entry):
                    if entry.uses is not None:
                        entry.uses -= 1
                    return entry
        raise MockScriptError("no mock script entry matches the request")

    def _run(self, entry: MockEntry):
        if entry.delay:
            time.sleep(entry.delay)
        if entry.error is not None:
            exc_type = _ERROR_KINDS.get(entry.error)
            if exc_type is None:
                raise MockScriptError(f"unknown scripted error kind {entry.error!r}")
            raise exc_type(f"scripted {entry.error} error")

    def chat(self, request: ChatRequest) -> tuple[str, dict]:
        self._enter()
        try:
            entry = self._take(lambda e: e.matches_chat(request))
            self._run(entry)
            if entry.response is None:
                raise MockScriptError("matched chat entry has no response text")
            usage = {
                "input_chars": len(request.system_text) + len(request.user_text),
                "output_chars": len(entry.response),
            }
            return entry.response, usage
        finally:
            self._exit()

    def embed(self, text: str, dimensionality: int) -> list[float]:
        self._enter()
        try:
            try:
                entry = self._take(lambda e: e.matches_embed(text))
            except MockScriptError:
                return _default_embedding(text, dimensionality)
            self._run(entry)
            if entry.vector is None:
                raise MockScriptError("matched embed entry has no vector")
            return list(entry.vector)
        finally:
            self._exit()


class OpenAICompatProvider:
    """Minimal OpenAI-compatible HTTP provider (chat completions + embeddings)."""

    def __init__(
        self,
        api_key: str,
        base_url: str = "https://api.openai.com/v1",
        chat_models: dict[str, str] | None = None,
        embed_model: str = "text-embedding-3-large",
        timeout: float = 180.0,
        send_reasoning_effort: bool = False,
    ):
        if not api_key:
            raise AuthError("missing API key for the OpenAI-compatible provider")
        self.api_key = api_key
        self.base_url = base_url.rstrip("/")
        self.chat_models = chat_models or {}
        self.embed_model = embed_model
        self.timeout = timeout
        self.send_reasoning_effort = send_reasoning_effort

    def _model_for(self, tag: str) -> str:
        model = self.chat_models.get(tag) or self.chat_models.get("default")
        if not model:
            raise ProviderError(f"no chat model configured for purpose tag {tag!r}")
        return model

    def _post(self, endpoint: str, payload: dict) -> dict:
        import requests

        try:
            resp = requests.post(
                f"{self.base_url}/{endpoint}",
                headers={"Authorization": f"Bearer {self.api_key}"},
                json=payload,
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransientProviderError(f"transport failure: {exc}") from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"auth rejected ({resp.status_code}): {resp.text[:200]}")
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientProviderError(f"provider {resp.status_code}: {resp.text[:200]}")
        if resp.status_code >= 400:
            body = resp.text[:500]
            if "content_policy" in body or "content policy" in body:
                raise ContentPolicyError(f"request refused: {body[:200]}")
            raise ProviderError(f"provider {resp.status_code}: {body[:200]}")
        return resp.json()

    def chat(self, request: ChatRequest) -> tuple[str, dict]:
        payload = {
            "model": self._model_for(request.tag),
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output,
        }
        if self.send_reasoning_effort and request.reasoning_effort != "none":
            payload["reasoning_effort"] = request.reasoning_effort
        data = self._post("chat/completions", payload)
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed chat response: {data!r}") from exc
        if text is None:
            raise ProviderError("chat response carried no text content")
        return text, data.get("usage", {}) or {}

    def embed(self, text: str, dimensionality: int) -> list[float]:
        payload = {"model": self.embed_model, "input": text, "dimensions": dimensionality}
        data = self._post("embeddings", payload)
        try:
            return list(data["data"][0]["embedding"])
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed embedding response: {data!r}") from exc


def _vector_digest(vector) -> str:
    arr = np.asarray(vector, dtype=np.float32)
    return hashlib.sha256(arr.tobytes()).hexdigest()[:16]


class Gateway:
    """Front door to a provider: retries, parallelism bound, journaling.

    Safe for concurrent use; in-flight requests are bounded by the
    parallelism cap; journal appends serialize inside Journal.
    """

    def __init__(
        self,
        provider,
        journal: Journal,
        parallelism: int = 1,
        max_attempts: int = 4,
        backoff_base: float = 0.5,
        backoff_cap: float = 8.0,
        sleep=time.sleep,
    ):
        if parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        self.provider = provider
        self.journal = journal
        self.parallelism = parallelism
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self._sleep = sleep
        self._sem = threading.Semaphore(parallelism)

    def _attempt_loop(self, fn):
        last_error: Exception | None = None
        for attempt in range(1, self.max_attempts + 1):
            try:
                return fn(), attempt
            except TransientProviderError as exc:
                last_error = exc
                if attempt < self.max_attempts:
                    self._sleep(min(self.backoff_cap, self.backoff_base * 2 ** (attempt - 1)))
        raise ExhaustedRetriesError(
            f"gave up after {self.max_attempts} attempts: {last_error}", last_error=last_error
        )

    def chat(self, request: ChatRequest) -> ProviderResponse:
        if not request.system_text or not request.user_text:
            raise ValueError("chat request texts must be non-empty")
        if request.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if request.tag not in PURPOSE_TAGS:
            raise ValueError(f"unknown purpose tag {request.tag!r}")
        if request.reasoning_effort not in REASONING_EFFORTS:
            raise ValueError(f"unknown reasoning effort {request.reasoning_effort!r}")

        call = self.journal.next_call_id()
        self.journal.append(
            "chat_request",
            call=call,
            tag=request.tag,
            lane=request.lane,
            system_text=request.system_text,
            user_text=request.user_text,
            temperature=request.temperature,
            reasoning_effort=request.reasoning_effort,
            max_output=request.max_output,
        )
        started = time.monotonic()
        try:
            with self._sem:
                (raw_text, usage), attempts = self._attempt_loop(
                    lambda: self.provider.chat(request)
                )
        except ProviderError as exc:
            self.journal.append(
                "chat_error",
                call=call,
                tag=request.tag,
                kind=type(exc).__name__,
                message=str(exc),
            )
            raise
        self.journal.append(
            "chat_response",
            call=call,
            tag=request.tag,
            raw_text=raw_text,
            usage=usage,
            attempts=attempts,
        )
        return ProviderResponse(
            raw_text=raw_text,
            usage=usage,
            latency=time.monotonic() - started,
            attempts=attempts,
        )

    def embed(self, request: EmbeddingRequest) -> np.ndarray:
        """Embed text; returns a float32 unit vector of the requested length."""
        if not request.text:
            raise ValueError("embedding text must be non-empty")
        if request.dimensionality < 1:
            raise ValueError("dimensionality must be >= 1")

        call = self.journal.next_call_id()
        self.journal.append(
            "embed_request", call=call, text=request.text, dim=request.dimensionality
        )
        try:
            with self._sem:
                raw, _attempts = self._attempt_loop(
                    lambda: self.provider.embed(request.text, request.dimensionality)
                )
            vector = np.asarray(raw, dtype=np.float32)
            if vector.ndim != 1 or vector.shape[0] != request.dimensionality:
                raise EmbeddingError(
                    f"expected dimensionality {request.dimensionality}, got shape {vector.shape}"
                )
            norm = float(np.linalg.norm(vector))
            if norm == 0.0:
                raise EmbeddingError("provider returned a zero vector; cannot normalize")
        except ProviderError as exc:
            self.journal.append(
                "embed_error", call=call, kind=type(exc).__name__, message=str(exc)
            )
            raise
        unit = (vector / norm).astype(np.float32)
        self.journal.append(
            "embed_response",
            call=call,
            dim=int(unit.shape[0]),
            digest=_vector_digest(unit),
        )
        return unit

    def chat_structured(self, request: ChatRequest, schema_id: str):
        """Chat and extract a typed value; one re-ask on malformed output.

        The re-ask appends a bare JSON reminder to the user text and nothing
        else; model text is never locally mutated into structure.
        """
        response = self.chat(request)
        try:
            return extract_json(response.raw_text, schema_id), response
        except ExtractionError:
            self.journal.append("note", note="json_reask", tag=request.tag, schema=schema_id)
        retry = replace(request, user_text=request.user_text + "\n\n" + JSON_REMINDER)
        response = self.chat(retry)
        return extract_json(response.raw_text, schema_id), response


def gateway_from_env(
    journal: Journal,
    provider_config: dict | None = None,
    mock_entries: list[MockEntry] | None = None,
) -> Gateway:
    """Build a gateway from RL_* environment variables plus optional config.

    ``RL_PROVIDER`` selects ``mock`` (default) or ``openai``;
    ``RL_PARALLELISM`` bounds in-flight requests; ``RL_MOCK_SCRIPT`` points
    the mock at a JSON-lines script file.
    """
    cfg = dict(provider_config or {})
    provider_id = os.environ.get("RL_PROVIDER", cfg.get("provider", "mock"))
    parallelism = int(os.environ.get("RL_PARALLELISM", cfg.get("parallelism", 1)))

    if provider_id == "mock":
        script = os.environ.get("RL_MOCK_SCRIPT", cfg.get("mock_script"))
        if mock_entries is not None:
            provider = MockProvider(mock_entries)
        elif script:
            provider = MockProvider.from_script(script)
        else:
            provider = MockProvider()
        backoff_base = 0.0
    elif provider_id == "openai":
        provider = OpenAICompatProvider(
            api_key=os.environ.get("OPENAI_API_KEY", ""),
            base_url=os.environ.get("OPENAI_BASE_URL", cfg.get("base_url", "https://api.openai.com/v1")),
            chat_models=cfg.get("chat_models") or {"default": os.environ.get("RL_MODEL", "gpt-4o-mini")},
            embed_model=os.environ.get("RL_EMBED_MODEL", cfg.get("embed_model", "text-embedding-3-large")),
            send_reasoning_effort=bool(cfg.get("send_reasoning_effort", False)),
        )
        backoff_base = float(cfg.get("backoff_base", 0.5))
    else:
        raise ProviderError(f"unknown provider id {provider_id!r}")

    return Gateway(
        provider,
        journal,
        parallelism=parallelism,
        max_attempts=int(cfg.get("max_attempts", 4)),
        backoff_base=backoff_base,
        backoff_cap=float(cfg.get("backoff_cap", 8.0)),
    )
