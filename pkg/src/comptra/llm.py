"""Chat-completion access: live OpenAI-compatible HTTP endpoints, scripted
mocks, and record/replay cassettes.

Decoding is always greedy (temperature 0.0) so that runs are reproducible;
sampling is deliberately not configurable. Request digests cover messages,
token budget and stop sequences but not the endpoint or model name, so a
cassette recorded against one server replays against any test double.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import httpx

from .errors import CassetteMiss, MalformedResponse, TransportError

_RETRY_DELAYS = (1.0, 2.0, 4.0)  # fixed schedule, doubled per retry

# test seam: patched to avoid real sleeps
_sleep = time.sleep


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    max_new_tokens: int
    temperature: float = 0.0
    stop: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.messages or self.messages[-1].role != "user":
            raise ValueError("last message must have role 'user'")
        if self.max_new_tokens <= 0:
            raise ValueError("max_new_tokens must be positive")
        if self.temperature != 0.0:
            raise ValueError("decoding is greedy; temperature must be 0.0")

    @classmethod
    def user(cls, prompt: str, max_new_tokens: int, stop=None) -> "ChatRequest":
        return cls(
            messages=(ChatMessage(role="user", content=prompt),),
            max_new_tokens=max_new_tokens,
            stop=tuple(stop) if stop else None,
        )

    @property
    def prompt(self) -> str:
        """Content of the final user message."""
        return self.messages[-1].content


def canonical_request_bytes(request: ChatRequest) -> bytes:
    """Stable serialization used for digests: messages + budget + stop."""
    payload = {
        "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        "max_new_tokens": request.max_new_tokens,
        "stop": list(request.stop) if request.stop else None,
    }
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def request_digest(request: ChatRequest) -> str:
    return hashlib.sha256(canonical_request_bytes(request)).hexdigest()


@dataclass(frozen=True)
class BackendConfig:
    kind: str  # http | mock | cassette
    endpoint_url: Optional[str] = None
    model_name: Optional[str] = None
    auth_env_var: str = "LLM_API_KEY"
    timeout_s: float = 120.0
    max_retries: int = 3
    max_concurrency: int = 8
    cassette_path: Optional[str] = None
    mock_responder: Optional[Callable[[ChatRequest], str]] = None

    def __post_init__(self):
        if self.kind == "http" and (not self.endpoint_url or not self.model_name):
            raise ValueError("http backend requires endpoint_url and model_name")
        if self.kind == "cassette" and not self.cassette_path:
            raise ValueError("cassette backend requires cassette_path")
        if self.kind not in ("http", "mock", "cassette"):
            raise ValueError(f"unknown backend kind: {self.kind!r}")


def default_mock_responder(request: ChatRequest) -> str:
    """Offline stand-in: splits decomposition prompts into clauses and
    echoes the sentence back for translation prompts."""
    prompt = request.prompt
    sentence = prompt.rstrip().rsplit("\n", 1)[-1].strip()
    if prompt.startswith("We would like to derive a list of short sentences"):
        clauses = [c.strip() for c in sentence.replace(";", ",").split(",") if c.strip()]
        items = clauses or [sentence]
        return "Propositions\n" + "\n".join(f"    {i}. {c}" for i, c in enumerate(items, 1))
    if prompt.startswith("We would like to propose a list of paraphrases"):
        return "Propositions\n" + "\n".join(f"    {i}. {sentence}" for i in range(1, 5))
    # translation-style prompts: the sentence sits between the quoted
    # request line and the closing instruction
    lines = [l for l in prompt.splitlines() if l.strip()]
    for i, line in enumerate(lines):
        if line.startswith("Please write a high-quality") and i + 1 < len(lines):
            return lines[i + 1]
    return sentence


def load_cassette(path) -> dict[str, str]:
    """Read a JSONL cassette into a digest -> response mapping."""
    table: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    # split on "\n" only: responses may contain raw U+2028 and friends
    for line in text.split("\n"):
        if not line.strip():
            continue
        record = json.loads(line)
        table[record["digest"]] = record["response"]
    return table


class LlmClient:
    """Thread-safe completion client for one backend configuration.

    At most ``config.max_concurrency`` requests are in flight at once; the
    retry schedule for 429/5xx/timeouts is fixed at 1s, 2s, 4s.
    """

    def __init__(self, config: BackendConfig):
        self.config = config
        self._gate = threading.BoundedSemaphore(config.max_concurrency)
        self._cassette: dict[str, str] | None = None
        self._http: httpx.Client | None = None
        if config.kind == "cassette":
            self._cassette = load_cassette(config.cassette_path)
        elif config.kind == "http":
            self._http = httpx.Client(timeout=config.timeout_s)

    def complete(self, request: ChatRequest) -> str:
        with self._gate:
            if self.config.kind == "mock":
                responder = self.config.mock_responder or default_mock_responder
                return _strip_one_newline(responder(request))
            if self.config.kind == "cassette":
                digest = request_digest(request)
                if digest not in self._cassette:
                    raise CassetteMiss(digest)
                # recorded responses were already stripped; replay verbatim
                return self._cassette[digest]
            return _strip_one_newline(self._complete_http(request))

    def _complete_http(self, request: ChatRequest) -> str:
        config = self.config
        url = config.endpoint_url.rstrip("/") + "/chat/completions"
        body = {
            "model": config.model_name,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "max_tokens": request.max_new_tokens,
            "temperature": 0.0,
        }
        if request.stop:
            body["stop"] = list(request.stop)
        headers = {}
        token = os.environ.get(config.auth_env_var, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"

        last_error: Exception | None = None
        for attempt in range(config.max_retries + 1):
            if attempt > 0:
                _sleep(_RETRY_DELAYS[min(attempt - 1, len(_RETRY_DELAYS) - 1)])
            try:
                resp = self._http.post(url, json=body, headers=headers)
            except httpx.TimeoutException as exc:
                last_error = TransportError(f"timeout: {exc}")
                continue
            except httpx.HTTPError as exc:
                last_error = TransportError(str(exc))
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = TransportError(resp.text[:200], status=resp.status_code)
                continue
            if resp.status_code != 200:
                raise TransportError(resp.text[:200], status=resp.status_code)
            return _parse_chat_response(resp)
        raise last_error

    def close(self):
        if self._http is not None:
            self._http.close()


def _strip_one_newline(text: str) -> str:
    return text[:-1] if text.endswith("\n") else text


def _parse_chat_response(resp) -> str:
    try:
        payload = resp.json()
    except (json.JSONDecodeError, ValueError) as exc:
        raise MalformedResponse(f"response is not JSON: {exc}") from exc
    try:
        content = payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise MalformedResponse("response lacks choices[0].message.content")
    if not isinstance(content, str):
        raise MalformedResponse("choices[0].message.content is not a string")
    return content


_clients: dict[BackendConfig, LlmClient] = {}
_clients_lock = threading.Lock()


def get_client(config: BackendConfig) -> LlmClient:
    with _clients_lock:
        client = _clients.get(config)
        if client is None:
            client = LlmClient(config)
            _clients[config] = client
        return client


def reset_client_cache() -> None:
    """Drop cached clients (tests that rewrite cassette files need this)."""
    with _clients_lock:
        for client in _clients.values():
            client.close()
        _clients.clear()


def complete_chat(backend: BackendConfig, request: ChatRequest) -> str:
    """One chat completion against any backend kind."""
    return get_client(backend).complete(request)


def record_cassette(backend: BackendConfig, requests, out_path) -> int:
    """Run ``requests`` against a live backend and write a JSONL cassette.

    One record per unique request digest: {"digest", "prompt", "response"}.
    Returns the number of records written.
    """
    client = get_client(backend)
    records: dict[str, dict] = {}
    for request in requests:
        digest = request_digest(request)
        if digest in records:
            continue
        response = client.complete(request)
        records[digest] = {"digest": digest, "prompt": request.prompt, "response": response}
    with open(out_path, "w", encoding="utf-8") as f:
        for record in records.values():
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
    return len(records)


class CassetteWriter:
    """Wraps any backend, recording every completion to a cassette file.

    Used to capture fixtures from live or mock runs; thread-safe,
    digest-deduplicated, flushed on close.
    """

    def __init__(self, inner: BackendConfig, out_path):
        self._client = get_client(inner)
        self._out_path = out_path
        self._records: dict[str, dict] = {}
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> str:
        response = self._client.complete(request)
        digest = request_digest(request)
        with self._lock:
            self._records.setdefault(
                digest, {"digest": digest, "prompt": request.prompt, "response": response}
            )
        return response

    def close(self) -> int:
        with open(self._out_path, "w", encoding="utf-8") as f:
            for record in self._records.values():
                f.write(json.dumps(record, ensure_ascii=False) + "\n")
        return len(self._records)
