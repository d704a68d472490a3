import json
import threading
import time

import httpx
import pytest

import comptra.llm as llm
from comptra.errors import CassetteMiss, MalformedResponse, TransportError
from comptra.llm import (
    BackendConfig,
    CassetteWriter,
    ChatRequest,
    LlmClient,
    canonical_request_bytes,
    load_cassette,
    record_cassette,
    request_digest,
)


def test_chat_request_validation():
    with pytest.raises(ValueError):
        ChatRequest(messages=(), max_new_tokens=10)
    with pytest.raises(ValueError):
        ChatRequest.user("p", max_new_tokens=0)
    with pytest.raises(ValueError):
        ChatRequest(
            messages=(llm.ChatMessage("user", "x"),), max_new_tokens=1, temperature=0.7
        )


def test_backend_config_validation():
    with pytest.raises(ValueError):
        BackendConfig(kind="http")  # needs endpoint + model
    with pytest.raises(ValueError):
        BackendConfig(kind="cassette")
    with pytest.raises(ValueError):
        BackendConfig(kind="wat")


def test_digest_is_stable_and_scoped():
    r1 = ChatRequest.user("hello", 100)
    r2 = ChatRequest.user("hello", 100)
    assert canonical_request_bytes(r1) == canonical_request_bytes(r2)
    assert request_digest(r1) == request_digest(r2)
    assert request_digest(ChatRequest.user("hello", 101)) != request_digest(r1)
    assert request_digest(ChatRequest.user("hello", 100, stop=["\n"])) != request_digest(r1)


def test_mock_scripted():
    def responder(request):
        if "Propositions" in request.prompt:
            return "1. A.\n2. B."
        return "other"

    backend = BackendConfig(kind="mock", mock_responder=responder)
    got = llm.complete_chat(backend, ChatRequest.user("Propositions please", 50))
    assert got == "1. A.\n2. B."


def test_mock_strips_one_trailing_newline():
    backend = BackendConfig(kind="mock", mock_responder=lambda r: "line\n\n")
    assert LlmClient(backend).complete(ChatRequest.user("x", 10)) == "line\n"


def test_cassette_record_replay_roundtrip(tmp_path):
    path = tmp_path / "c.jsonl"
    backend = BackendConfig(kind="mock", mock_responder=lambda r: f"resp:{r.prompt}")
    requests = [ChatRequest.user("a", 10), ChatRequest.user("b", 10), ChatRequest.user("a", 10)]
    n = record_cassette(backend, requests, path)
    assert n == 2  # digest-deduplicated

    replay = LlmClient(BackendConfig(kind="cassette", cassette_path=str(path)))
    assert replay.complete(ChatRequest.user("a", 10)) == "resp:a"
    assert replay.complete(ChatRequest.user("b", 10)) == "resp:b"

    record = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
    assert set(record) == {"digest", "prompt", "response"}
    assert record["digest"] == request_digest(ChatRequest.user("a", 10))


def test_cassette_miss(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text("", encoding="utf-8")
    client = LlmClient(BackendConfig(kind="cassette", cassette_path=str(path)))
    with pytest.raises(CassetteMiss):
        client.complete(ChatRequest.user("never recorded", 10))


def test_cassette_writer_wraps_backend(tmp_path):
    path = tmp_path / "c.jsonl"
    writer = CassetteWriter(BackendConfig(kind="mock", mock_responder=lambda r: "ok"), path)
    writer.complete(ChatRequest.user("a", 10))
    writer.complete(ChatRequest.user("a", 10))
    assert writer.close() == 1
    assert len(load_cassette(path)) == 1


def _http_client(handler, **kwargs) -> LlmClient:
    config = BackendConfig(kind="http", endpoint_url="http://test", model_name="m", **kwargs)
    client = LlmClient(config)
    client._http = httpx.Client(transport=httpx.MockTransport(handler), timeout=1.0)
    return client


def test_http_happy_path(monkeypatch):
    def handler(request):
        body = json.loads(request.content)
        assert request.url.path == "/chat/completions"
        assert body["temperature"] == 0.0 and body["model"] == "m"
        return httpx.Response(200, json={"choices": [{"message": {"content": "hi\n"}}]})

    client = _http_client(handler)
    assert client.complete(ChatRequest.user("p", 10)) == "hi"


def test_http_retries_then_succeeds(monkeypatch):
    sleeps = []
    monkeypatch.setattr(llm, "_sleep", sleeps.append)
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        if calls["n"] < 3:
            return httpx.Response(500, text="boom")
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    client = _http_client(handler)
    assert client.complete(ChatRequest.user("p", 10)) == "ok"
    assert sleeps == [1.0, 2.0]


def test_http_retries_exhausted(monkeypatch):
    monkeypatch.setattr(llm, "_sleep", lambda s: None)
    client = _http_client(lambda request: httpx.Response(429, text="slow down"))
    with pytest.raises(TransportError) as err:
        client.complete(ChatRequest.user("p", 10))
    assert err.value.status == 429


def test_http_non_retryable_status():
    client = _http_client(lambda request: httpx.Response(403, text="no"))
    with pytest.raises(TransportError) as err:
        client.complete(ChatRequest.user("p", 10))
    assert err.value.status == 403


def test_http_malformed_response():
    client = _http_client(lambda request: httpx.Response(200, json={"choices": []}))
    with pytest.raises(MalformedResponse):
        client.complete(ChatRequest.user("p", 10))


def test_http_sends_bearer_token(monkeypatch):
    monkeypatch.setenv("MY_TOKEN", "s3cret")
    seen = {}

    def handler(request):
        seen["auth"] = request.headers.get("authorization")
        return httpx.Response(200, json={"choices": [{"message": {"content": "x"}}]})

    client = _http_client(handler, auth_env_var="MY_TOKEN")
    client.complete(ChatRequest.user("p", 10))
    assert seen["auth"] == "Bearer s3cret"


def test_concurrency_bound():
    state = {"active": 0, "max": 0}
    lock = threading.Lock()

    def responder(request):
        with lock:
            state["active"] += 1
            state["max"] = max(state["max"], state["active"])
        time.sleep(0.01)
        with lock:
            state["active"] -= 1
        return "r"

    client = LlmClient(BackendConfig(kind="mock", mock_responder=responder, max_concurrency=3))
    threads = [
        threading.Thread(target=client.complete, args=(ChatRequest.user(f"p{i}", 5),))
        for i in range(12)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert state["max"] <= 3
