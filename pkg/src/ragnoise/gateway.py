"""External model interfaces.

- ChatClient: chat-completion HTTP client with a content-addressed response
  cache, retries with exponential backoff, and a bounded in-flight cap.
  Base URLs with the mock: scheme route to a deterministic offline transport.
- Compressor adapters: the student-compressor wire protocol over a subprocess
  (line-delimited JSON on stdio) or an HTTP endpoint.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import os
import shlex
import subprocess
import sys
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Protocol, Sequence

import httpx

from .dataio import atomic_writer
from .models import QueryRecord
from .prompts import default_answer_instruction

log = logging.getLogger(__name__)

RETRYABLE_STATUS = frozenset({408, 429, 500, 502, 503, 504})


@dataclass(frozen=True)
class ChatRequest:
    model_id: str
    system_prompt: str
    user_prompt: str
    max_output_tokens: int = 256
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if not self.system_prompt or not self.user_prompt:
            raise ValueError("prompts must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")


def request_key(req: ChatRequest) -> str:
    payload = json.dumps(
        [req.model_id, req.system_prompt, req.user_prompt, req.max_output_tokens, req.temperature],
        ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ChatError(Exception):
    def __init__(self, message: str, *, digest: str | None = None,
                 attempts: int | None = None, status: int | None = None):
        self.digest = digest
        self.attempts = attempts
        self.status = status
        detail = []
        if digest:
            detail.append(f"request {digest[:12]}")
        if attempts is not None:
            detail.append(f"after {attempts} attempt(s)")
        if status is not None:
            detail.append(f"status {status}")
        suffix = f" ({', '.join(detail)})" if detail else ""
        super().__init__(message + suffix)


class ResponseCache:
    """Read-through, append-only completion cache.

    Entries live in memory and, when a directory is configured, as one JSON
    file per key so re-runs across processes stay free.
    """

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory is not None else None
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
        self._mem: dict[str, str] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> str | None:
        with self._lock:
            if key in self._mem:
                return self._mem[key]
        if self.directory is not None:
            path = self.directory / f"{key}.json"
            if path.exists():
                entry = json.loads(path.read_text(encoding="utf-8"))
                value = entry["value"]
                with self._lock:
                    self._mem[key] = value
                return value
        return None

    def put(self, key: str, value: str) -> None:
        with self._lock:
            self._mem[key] = value
        if self.directory is not None:
            entry = {"key": key, "value": value, "created_at": time.time()}
            with atomic_writer(self.directory / f"{key}.json") as fh:
                json.dump(entry, fh, ensure_ascii=False)


def default_mock_completion(body: dict[str, Any]) -> str:
    """Deterministic stand-in completion: a short digest of the request."""
    messages = body.get("messages", [])
    user = next((m.get("content", "") for m in reversed(messages) if m.get("role") == "user"), "")
    digest = hashlib.sha256(f"{body.get('model', '')}\x00{user}".encode("utf-8")).hexdigest()[:8]
    if "Document 1:" in user:
        return f"mock summary {digest}"
    return f"mock answer {digest}"


class MockChatTransport(httpx.BaseTransport):
    """Offline chat endpoint for tests and dry runs; counts calls and tracks
    the number of simultaneously in-flight requests."""

    def __init__(self, completion_fn: Callable[[dict[str, Any]], str] | None = None,
                 latency: float = 0.0, fail_first: int = 0, fail_status: int = 429):
        self.completion_fn = completion_fn or default_mock_completion
        self.latency = latency
        self.fail_first = fail_first
        self.fail_status = fail_status
        self.calls = 0
        self.in_flight = 0
        self.max_in_flight_seen = 0
        self._lock = threading.Lock()

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        with self._lock:
            self.calls += 1
            call_no = self.calls
            self.in_flight += 1
            self.max_in_flight_seen = max(self.max_in_flight_seen, self.in_flight)
        try:
            if self.latency:
                time.sleep(self.latency)
            if call_no <= self.fail_first:
                return httpx.Response(self.fail_status, json={"error": "induced failure"})
            body = json.loads(request.content.decode("utf-8"))
            content = self.completion_fn(body)
            return httpx.Response(200, json={"choices": [{"message": {"content": content}}]})
        finally:
            with self._lock:
                self.in_flight -= 1


class ChatClient:
    """Chat-completion client for the teacher and answerer endpoints.

    Safe for concurrent use; at most `max_in_flight` requests are on the wire
    at once. Identical requests are served from the cache without touching
    the network.
    """

    def __init__(self, base_url: str, model_id: str, *,
                 credential_env: str = "RAGNOISE_API_KEY",
                 cache: ResponseCache | None = None,
                 max_retries: int = 4, backoff_base: float = 0.25,
                 timeout: float = 30.0, max_in_flight: int = 4,
                 transport: httpx.BaseTransport | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.model_id = model_id
        self.credential_env = credential_env
        self.cache = cache if cache is not None else ResponseCache()
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._sleep = sleep
        self._sem = threading.BoundedSemaphore(max_in_flight)
        self.is_mock = base_url.startswith("mock:")
        if self.is_mock and transport is None:
            transport = MockChatTransport()
        self.transport = transport
        url = "http://mock.invalid" if self.is_mock else base_url
        self._endpoint = url.rstrip("/") + "/chat/completions"
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def _headers(self) -> dict[str, str]:
        if self.is_mock:
            return {}
        token = os.environ.get(self.credential_env, "")
        if not token:
            raise ChatError(f"credential environment variable {self.credential_env!r} is not set")
        return {"Authorization": f"Bearer {token}"}

    def chat_complete(self, req: ChatRequest) -> str:
        key = request_key(req)
        cached = self.cache.get(key)
        if cached is not None:
            return cached

        body = {
            "model": req.model_id,
            "messages": [
                {"role": "system", "content": req.system_prompt},
                {"role": "user", "content": req.user_prompt},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        }
        headers = self._headers()
        attempts = 0
        last_status: int | None = None
        last_error = "request failed"
        while attempts <= self.max_retries:
            attempts += 1
            try:
                with self._sem:
                    resp = self._client.post(self._endpoint, json=body, headers=headers)
            except httpx.TransportError as exc:
                last_error = f"transport failure: {exc}"
                self._sleep(self.backoff_base * (2 ** (attempts - 1)))
                continue
            if resp.status_code in RETRYABLE_STATUS:
                last_status = resp.status_code
                last_error = f"retryable status {resp.status_code}"
                self._sleep(self.backoff_base * (2 ** (attempts - 1)))
                continue
            if resp.status_code != 200:
                raise ChatError("endpoint returned non-retryable status",
                                digest=key, attempts=attempts, status=resp.status_code)
            try:
                content = resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise ChatError(f"malformed completion response: {exc}",
                                digest=key, attempts=attempts) from exc
            if not isinstance(content, str):
                raise ChatError("completion content is not a string", digest=key, attempts=attempts)
            self.cache.put(key, content)
            return content
        raise ChatError(f"retries exhausted: {last_error}",
                        digest=key, attempts=attempts, status=last_status)

    def answer(self, query: QueryRecord, context: str | None = None,
               instruction: str | None = None, max_output_tokens: int = 64) -> str:
        """Ask the answerer model; when context is None no document section is sent."""
        req = build_answer_request(
            self.model_id,
            instruction if instruction is not None else default_answer_instruction(),
            query.question, context, max_output_tokens=max_output_tokens)
        return self.chat_complete(req)

    def close(self) -> None:
        self._client.close()


def build_answer_request(model_id: str, instruction: str, question: str,
                         context: str | None = None, *,
                         max_output_tokens: int = 64, temperature: float = 0.0) -> ChatRequest:
    parts = []
    if context is not None:
        parts.append(f"Context:\n{context}")
    parts.append(f"Question: {question}")
    return ChatRequest(model_id=model_id, system_prompt=instruction,
                       user_prompt="\n\n".join(parts),
                       max_output_tokens=max_output_tokens, temperature=temperature)


# --- student-compressor adapter protocol ---------------------------------


class AdapterError(Exception):
    """Adapter process/endpoint failed or disconnected."""


class AdapterProtocolError(AdapterError):
    """The adapter spoke, but not the wire format."""


class Compressor(Protocol):
    identity: str

    def compress(self, query: str, documents: Sequence[str]) -> str: ...

    def close(self) -> None: ...


def compress(adapter: Compressor, query: str, documents: Sequence[str]) -> str:
    """Send one request over the adapter protocol and return the matched summary."""
    return adapter.compress(query, documents)


class SubprocessCompressor:
    """Adapter over a child process speaking line-delimited JSON on stdio.

    Requests may be pipelined from multiple threads; responses are matched by
    id, so adapters that answer out of order are fine.
    """

    def __init__(self, argv: Sequence[str], *, identity: str | None = None,
                 timeout: float = 60.0):
        self.identity = identity or "cmd:" + " ".join(argv)
        self._timeout = timeout
        self._proc = subprocess.Popen(
            list(argv), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, encoding="utf-8", bufsize=1)
        self._results: dict[str, str] = {}
        self._cond = threading.Condition()
        self._write_lock = threading.Lock()
        self._ids = itertools.count(1)
        self._dead: Exception | None = None
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self) -> None:
        failure: Exception | None = None
        try:
            assert self._proc.stdout is not None
            for line in self._proc.stdout:
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    rid = obj["id"]
                    summary = obj["summary"]
                    if not isinstance(rid, str) or not isinstance(summary, str):
                        raise TypeError("id and summary must be strings")
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    failure = AdapterProtocolError(f"malformed adapter response {line[:200]!r}: {exc}")
                    break
                with self._cond:
                    self._results[rid] = summary
                    self._cond.notify_all()
        except ValueError:
            pass  # stream closed mid-read
        with self._cond:
            self._dead = failure or AdapterError("adapter closed its output stream")
            self._cond.notify_all()

    def compress(self, query: str, documents: Sequence[str], timeout: float | None = None) -> str:
        rid = f"r{next(self._ids)}"
        line = json.dumps({"id": rid, "query": query, "documents": list(documents)},
                          ensure_ascii=False)
        with self._write_lock:
            if self._proc.poll() is not None and self._dead is not None:
                raise AdapterError(f"adapter process already exited (request {rid} not sent)")
            assert self._proc.stdin is not None
            try:
                self._proc.stdin.write(line + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise AdapterError(f"adapter pipe closed while sending request {rid}") from exc
        deadline = time.monotonic() + (timeout if timeout is not None else self._timeout)
        with self._cond:
            while rid not in self._results:
                if self._dead is not None:
                    kind = (AdapterProtocolError if isinstance(self._dead, AdapterProtocolError)
                            else AdapterError)
                    raise kind(f"adapter terminated with request {rid} pending: "
                               f"{self._dead}") from self._dead
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise AdapterError(f"timed out waiting for response to request {rid}")
                self._cond.wait(timeout=min(remaining, 0.5))
            return self._results.pop(rid)

    def orphans(self) -> list[str]:
        """Ids of responses nobody asked for; nonempty means the adapter broke
        the one-response-per-request rule."""
        with self._cond:
            return sorted(self._results)

    def close(self) -> None:
        try:
            if self._proc.stdin is not None:
                self._proc.stdin.close()
        except OSError:
            pass
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def __enter__(self) -> "SubprocessCompressor":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


class HTTPCompressor:
    """Adapter over an HTTP endpoint: one request record per POST."""

    def __init__(self, url: str, *, timeout: float = 60.0, client: httpx.Client | None = None):
        self.url = url
        self.identity = f"http:{url}"
        self._client = client or httpx.Client(timeout=timeout)
        self._ids = itertools.count(1)

    def compress(self, query: str, documents: Sequence[str]) -> str:
        rid = f"h{next(self._ids)}"
        try:
            resp = self._client.post(self.url, json={"id": rid, "query": query,
                                                     "documents": list(documents)})
        except httpx.TransportError as exc:
            raise AdapterError(f"compressor endpoint unreachable (request {rid})") from exc
        if resp.status_code != 200:
            raise AdapterError(f"compressor endpoint returned status {resp.status_code} for request {rid}")
        try:
            body = resp.json()
            rid_back, summary = body["id"], body["summary"]
        except (KeyError, ValueError, TypeError) as exc:
            raise AdapterProtocolError(f"malformed compressor response: {exc}") from exc
        if rid_back != rid:
            raise AdapterProtocolError(f"response id {rid_back!r} does not match request id {rid!r}")
        if not isinstance(summary, str):
            raise AdapterProtocolError("summary must be a string")
        return summary

    def close(self) -> None:
        self._client.close()


def make_compressor(spec: str, timeout: float = 60.0) -> Compressor:
    """Build an adapter from a CLI-style spec.

    echo | truncate[:N] | empty   bundled adapters, run as a subprocess
    cmd:<command line>            any command speaking the line protocol
    http:<url>                    HTTP endpoint
    """
    if spec in ("echo", "empty") or spec.startswith("truncate"):
        argv = [sys.executable, "-m", "ragnoise.adapters"]
        if spec.startswith("truncate"):
            argv.append("truncate")
            if ":" in spec:
                argv += ["--tokens", spec.split(":", 1)[1]]
        else:
            argv.append(spec)
        return SubprocessCompressor(argv, identity=spec, timeout=timeout)
    if spec.startswith("cmd:"):
        return SubprocessCompressor(shlex.split(spec[4:]), timeout=timeout)
    if spec.startswith("http:") or spec.startswith("https:"):
        return HTTPCompressor(spec, timeout=timeout)
    raise ValueError(f"unknown compressor spec {spec!r}")
