"""Serve a trained checkpoint over the line-delimited JSON protocol.

One request per line: {"id", "query", "documents"}. One response per
request: {"id", "summary"}, flushed immediately. Requests are handled
sequentially in arrival order.
"""

from __future__ import annotations

import json
import logging
import socket
import sys
from typing import IO

from .data import build_input_text
from .model import Seq2SeqSummarizer, greedy_decode
from .training import TrainConfig
from .vocab import BOS, Vocabulary

log = logging.getLogger("summtrain.serve")


def summarize(model: Seq2SeqSummarizer, vocab: Vocabulary, config: TrainConfig,
              query: str, documents: list[str], max_new_tokens: int = 32) -> str:
    instruction = config.instruction if config.include_instruction else None
    text = build_input_text(query, documents, instruction)
    src = [BOS] + vocab.encode(text)[: config.max_input_tokens]
    return vocab.decode(greedy_decode(model, src, max_new_tokens))


def handle_line(line: str, model, vocab, config, max_new_tokens: int) -> dict | None:
    """The response object for one request line, or None when there is no
    id to answer with (such lines are logged and skipped)."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        log.error("unparseable request line skipped: %s", exc.msg)
        return None
    if not isinstance(obj, dict) or not isinstance(obj.get("id"), str):
        log.error("request without a usable id skipped")
        return None
    request_id = obj["id"]
    query = obj.get("query")
    documents = obj.get("documents")
    if not isinstance(query, str) or not isinstance(documents, list) \
            or not all(isinstance(d, str) for d in documents):
        return {"id": request_id, "error": "expected string query and list of string documents"}
    if not documents:
        log.warning("id=%s: empty document list; summarizing from the question alone",
                    request_id)
    summary = summarize(model, vocab, config, query, documents, max_new_tokens)
    return {"id": request_id, "summary": summary}


def serve_stream(reader: IO[str], writer: IO[str], model, vocab, config,
                 max_new_tokens: int = 32) -> int:
    """Answer requests from reader on writer until EOF; returns the count."""
    answered = 0
    for line in reader:
        if not line.strip():
            continue
        response = handle_line(line, model, vocab, config, max_new_tokens)
        if response is None:
            continue
        writer.write(json.dumps(response, ensure_ascii=False) + "\n")
        writer.flush()
        answered += 1
    return answered


def serve_stdio(model, vocab, config, max_new_tokens: int = 32) -> int:
    return serve_stream(sys.stdin, sys.stdout, model, vocab, config, max_new_tokens)


def serve_socket(path: str, model, vocab, config, max_new_tokens: int = 32,
                 max_connections: int | None = None) -> None:
    """Accept connections on a unix socket, one at a time, same protocol."""
    server = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
    try:
        server.bind(path)
        server.listen(1)
        log.info("listening on %s", path)
        served = 0
        while max_connections is None or served < max_connections:
            conn, _ = server.accept()
            with conn:
                reader = conn.makefile("r", encoding="utf-8")
                writer = conn.makefile("w", encoding="utf-8")
                serve_stream(reader, writer, model, vocab, config, max_new_tokens)
            served += 1
    finally:
        server.close()
