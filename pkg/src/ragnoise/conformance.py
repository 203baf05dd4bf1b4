"""Adapter conformance checks.

Runs a battery of wire-protocol checks against any compressor adapter:
responses arrive for every request, ids are matched correctly under
pipelining, UTF-8 round-trips, repeated requests give identical summaries,
and no unsolicited responses appear. Trained compressors served over the
line protocol must pass this before their end-to-end numbers mean anything.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .gateway import AdapterError, Compressor

PIPELINE_WIDTH = 8

_PROBES: list[tuple[str, list[str]]] = [
    ("what color is the sky", ["The sky is blue on clear days.", "Oceans look blue too."]),
    ("who wrote the letter", ["The letter was written by Ada.", "It arrived on Tuesday."]),
    ("когда открыли кафе", ["Das naïve Café öffnete 1987 in 東京.", "Es war ein regnerischer Tag."]),
    ("how many moons", ["Mars has two moons, Phobos and Deimos."]),
    ("smallest prime", ["Two is the smallest prime number.", "One is not prime."]),
    ("longest river", ["The Nile and the Amazon compete for the title."]),
    ("first computer", ["ENIAC ran its first program in 1945."]),
    ("deepest trench", ["The Mariana Trench is the deepest known point."]),
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _check(name: str, condition: bool, detail: str = "") -> CheckResult:
    return CheckResult(name=name, passed=condition, detail="" if condition else detail)


def run_conformance(adapter: Compressor, pipeline_width: int = PIPELINE_WIDTH) -> list[CheckResult]:
    """Run every check; exceptions fail the check that triggered them but the
    remaining checks still run."""
    results: list[CheckResult] = []

    def attempt(name: str, fn) -> None:
        try:
            results.append(fn())
        except AdapterError as exc:
            results.append(CheckResult(name=name, passed=False, detail=str(exc)))
        except Exception as exc:  # noqa: BLE001 -- report, don't crash the suite
            results.append(CheckResult(name=name, passed=False,
                                       detail=f"unexpected {type(exc).__name__}: {exc}"))

    def basic() -> CheckResult:
        out = adapter.compress(*_PROBES[0])
        return _check("responds", isinstance(out, str),
                      f"summary has type {type(out).__name__}")

    def utf8() -> CheckResult:
        query, docs = _PROBES[2]
        out = adapter.compress(query, docs)
        return _check("utf8_round_trip", isinstance(out, str),
                      "no summary for a non-ASCII request")

    def empty_docs() -> CheckResult:
        out = adapter.compress("question with no documents", [])
        return _check("empty_document_list", isinstance(out, str),
                      f"summary has type {type(out).__name__}")

    def determinism() -> CheckResult:
        first = adapter.compress(*_PROBES[1])
        second = adapter.compress(*_PROBES[1])
        return _check("deterministic_repeat", first == second,
                      f"got {first[:60]!r} then {second[:60]!r}")

    sequential: dict[int, str] = {}

    def pipelining() -> CheckResult:
        probes = (_PROBES * ((pipeline_width // len(_PROBES)) + 1))[:pipeline_width]
        for i, probe in enumerate(probes):
            sequential[i] = adapter.compress(*probe)
        with ThreadPoolExecutor(max_workers=pipeline_width) as pool:
            concurrent = list(pool.map(lambda p: adapter.compress(*p), probes))
        mismatches = [i for i, out in enumerate(concurrent) if out != sequential[i]]
        return _check("pipelined_id_matching", not mismatches,
                      f"responses mismatched for requests {mismatches}")

    def reversed_order() -> CheckResult:
        probes = list(reversed((_PROBES * 2)[:pipeline_width]))
        with ThreadPoolExecutor(max_workers=pipeline_width) as pool:
            outs = list(pool.map(lambda p: adapter.compress(*p), probes))
        expected = [adapter.compress(*p) for p in probes]
        return _check("issue_order_independence", outs == expected,
                      "summaries depend on request issue order")

    def no_orphans() -> CheckResult:
        orphan_fn = getattr(adapter, "orphans", None)
        if orphan_fn is None:
            return _check("one_response_per_request", True)
        orphans = orphan_fn()
        return _check("one_response_per_request", not orphans,
                      f"unsolicited response ids: {orphans}")

    attempt("responds", basic)
    attempt("utf8_round_trip", utf8)
    attempt("empty_document_list", empty_docs)
    attempt("deterministic_repeat", determinism)
    attempt("pipelined_id_matching", pipelining)
    attempt("issue_order_independence", reversed_order)
    attempt("one_response_per_request", no_orphans)
    return results


def all_passed(results: Sequence[CheckResult]) -> bool:
    return all(r.passed for r in results)


def render_results(results: Sequence[CheckResult]) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        suffix = f"  ({r.detail})" if r.detail else ""
        lines.append(f"{status}  {r.name}{suffix}")
    verdict = "all checks passed" if all_passed(results) else "conformance FAILED"
    return "\n".join(lines + [verdict])
