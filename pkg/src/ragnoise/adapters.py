"""Bundled stand-in compressors speaking the adapter line protocol.

Run as `python -m ragnoise.adapters <mode>`; requests arrive on stdin as
{"id", "query", "documents"} lines, responses leave on stdout as
{"id", "summary"} lines.

Modes:
  echo       summary = the documents joined verbatim (identity compression)
  truncate   summary = first N whitespace tokens of the joined documents
  empty      summary = ""
  reverse    buffers --batch requests, then answers them in reverse order;
             exists to exercise out-of-order response matching in clients
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable, Iterator, Sequence, TextIO

Handler = Callable[[str, Sequence[str]], str]


def echo_summary(query: str, documents: Sequence[str]) -> str:
    return "\n".join(documents)


def make_truncate_summary(tokens: int) -> Handler:
    def truncate_summary(query: str, documents: Sequence[str]) -> str:
        return " ".join("\n".join(documents).split()[:tokens])

    return truncate_summary


def empty_summary(query: str, documents: Sequence[str]) -> str:
    return ""


def iter_requests(stream: TextIO) -> Iterator[dict]:
    for line in stream:
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            obj["id"], obj["query"], obj["documents"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            print(f"adapter: skipping malformed request line: {exc}", file=sys.stderr)
            continue
        yield obj


def respond(stream: TextIO, rid: str, summary: str) -> None:
    stream.write(json.dumps({"id": rid, "summary": summary}, ensure_ascii=False) + "\n")
    stream.flush()


def serve(handler: Handler, stdin: TextIO | None = None, stdout: TextIO | None = None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for req in iter_requests(stdin):
        respond(stdout, req["id"], handler(req["query"], req["documents"]))


def serve_reversed(handler: Handler, batch: int, stdin: TextIO | None = None,
                   stdout: TextIO | None = None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    pending: list[dict] = []
    for req in iter_requests(stdin):
        pending.append(req)
        if len(pending) >= batch:
            for held in reversed(pending):
                respond(stdout, held["id"], handler(held["query"], held["documents"]))
            pending.clear()
    for held in reversed(pending):
        respond(stdout, held["id"], handler(held["query"], held["documents"]))


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="ragnoise.adapters", description=__doc__)
    parser.add_argument("mode", choices=["echo", "truncate", "empty", "reverse"])
    parser.add_argument("--tokens", type=int, default=10, help="token budget for truncate")
    parser.add_argument("--batch", type=int, default=4, help="batch size for reverse")
    args = parser.parse_args(argv)

    if args.mode == "echo":
        serve(echo_summary)
    elif args.mode == "truncate":
        serve(make_truncate_summary(args.tokens))
    elif args.mode == "empty":
        serve(empty_summary)
    else:
        serve_reversed(echo_summary, args.batch)
    return 0


if __name__ == "__main__":
    sys.exit(main())
