"""Offline factual-error construction.

Per record: draw one of N+1 equally likely outcomes (corrupt none, or corrupt
the m-th evidential document in rank order), then replace the located answer
span with a wrong entity from a pluggable corruptor. Outcomes are a pure
function of (seed, query_id, N), so worker count and record order can never
change results.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import replace
from typing import Protocol, Sequence

import httpx

from .models import (
    AugmentationDecision,
    AugmentedSet,
    LabeledDocument,
    NoiseKind,
    NoiseLabel,
    Provenance,
    RetrievalSet,
)
from .normalize import contains_answer, find_answer_span, normalize_text

log = logging.getLogger(__name__)

MASK_TOKEN = "[MASK]"
DEFAULT_MAX_ATTEMPTS = 5


class CorruptionFailed(Exception):
    """No acceptable replacement could be produced for this record."""


class CorruptorError(Exception):
    """The corruptor itself failed (empty pool, unreachable service)."""


class Corruptor(Protocol):
    identity: str

    def propose(self, masked_text: str, span: str, seed: int) -> list[str]:
        """Return candidate replacement entities, best first."""
        ...


def stable_hash64(*parts: str | int) -> int:
    """Order-sensitive 64-bit hash of the parts, stable across runs and platforms."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        data = str(part).encode("utf-8")
        h.update(len(data).to_bytes(4, "big"))
        h.update(data)
    return int.from_bytes(h.digest(), "big")


def draw_outcome(query_id: str, seed: int, n_evidential: int) -> int:
    """Uniform draw over {0..N}: 0 = corrupt none, m = corrupt the m-th evidential doc.

    Each outcome has probability 1/(N+1). Rejection sampling removes modulo
    bias; the draw depends only on (seed, query_id, N).
    """
    if n_evidential < 0:
        raise ValueError("n_evidential must be >= 0")
    if n_evidential == 0:
        return 0
    span = n_evidential + 1
    limit = (1 << 64) - ((1 << 64) % span)
    counter = 0
    while True:
        value = stable_hash64("outcome", seed, query_id, n_evidential, counter)
        if value < limit:
            return value % span
        counter += 1


class DistractorPool:
    """Offline corruptor: proposes answers of other queries in the same dataset.

    Entries are deduplicated under normalization and kept in sorted order so
    proposals depend only on (pool contents, seed, span).
    """

    def __init__(self, entries: Sequence[str], max_candidates: int = 8):
        unique: dict[str, str] = {}
        for e in entries:
            key = normalize_text(e)
            if key and key not in unique:
                unique[key] = e
        self.entries = [unique[k] for k in sorted(unique)]
        self.max_candidates = max_candidates
        self.identity = "distractor_pool"

    @classmethod
    def from_queries(cls, queries, **kwargs) -> "DistractorPool":
        return cls([q.answers[0] for q in queries], **kwargs)

    def propose(self, masked_text: str, span: str, seed: int) -> list[str]:
        span_norm = normalize_text(span)
        usable = [e for e in self.entries if normalize_text(e) != span_norm]
        if not usable:
            raise CorruptorError("distractor pool has no usable entries")
        start = stable_hash64("distractor", seed, span) % len(usable)
        picked = [usable[(start + i) % len(usable)] for i in range(min(self.max_candidates, len(usable)))]
        return picked


class FillMaskCorruptor:
    """Corruptor backed by an external fill-mask HTTP service.

    Request:  {"text": <text with one [MASK]>, "top_k": int}
    Response: {"candidates": [{"token": str, "score": number}, ..]}
    """

    def __init__(self, url: str, *, top_k: int = 8, timeout: float = 15.0,
                 max_retries: int = 2, client: httpx.Client | None = None):
        self.url = url
        self.top_k = top_k
        self.max_retries = max_retries
        self.identity = f"fillmask:{url}"
        self._client = client or httpx.Client(timeout=timeout)

    def propose(self, masked_text: str, span: str, seed: int) -> list[str]:
        payload = {"text": masked_text, "top_k": self.top_k}
        last_exc: Exception | None = None
        for _ in range(self.max_retries + 1):
            try:
                resp = self._client.post(self.url, json=payload)
                resp.raise_for_status()
                body = resp.json()
                candidates = body["candidates"]
                ranked = sorted(candidates, key=lambda c: -float(c["score"]))
                return [str(c["token"]) for c in ranked]
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                last_exc = exc
            except (KeyError, TypeError, ValueError) as exc:
                raise CorruptorError(f"malformed fill-mask response: {exc}") from exc
        raise CorruptorError(f"fill-mask service unreachable: {last_exc}")


def corrupt_document(doc: LabeledDocument, aliases: Sequence[str], corruptor: Corruptor,
                     seed: int, max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                     ) -> tuple[LabeledDocument, tuple[str, str]]:
    """Turn an evidential document into a factual-error document.

    Locates the longest occurring alias (earliest occurrence on ties),
    replaces every occurrence of that surface span with a corruptor proposal,
    and accepts the first proposal whose result no longer contains any alias.
    Raises CorruptionFailed when no proposal survives after `max_attempts`.
    """
    if doc.label.kind is not NoiseKind.EVIDENTIAL:
        raise ValueError("only evidential documents can be corrupted")
    text = doc.doc.text
    located = find_answer_span(text, aliases)
    if located is None:
        raise CorruptionFailed("no alias span located in document text")
    start, end, _ = located
    surface = text[start:end]
    if MASK_TOKEN in text:
        raise CorruptionFailed("document text already contains the mask placeholder")
    masked = text[:start] + MASK_TOKEN + text[end:]

    alias_norms = {normalize_text(a) for a in aliases if normalize_text(a)}
    candidates = corruptor.propose(masked, surface, seed)
    attempts = 0
    for candidate in candidates:
        if attempts >= max_attempts:
            break
        attempts += 1
        cand_norm = normalize_text(candidate)
        if not cand_norm or cand_norm in alias_norms:
            continue
        new_text = text.replace(surface, candidate)
        if new_text == text:
            continue
        if contains_answer(new_text, aliases):
            continue
        corrupted = LabeledDocument(
            doc=replace(doc.doc, text=new_text),
            label=NoiseLabel(NoiseKind.FACTUAL_ERROR, Provenance.AUGMENTED),
        )
        return corrupted, (surface, candidate)
    raise CorruptionFailed(f"candidates exhausted after {attempts} attempts")


def augment_set(rset: RetrievalSet, seed: int, corruptor: Corruptor,
                max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> AugmentedSet:
    """Apply the seeded draw to one classified set and corrupt the chosen document.

    A CorruptionFailed from the corruptor falls back to outcome 0 with the
    failure recorded in the decision.
    """
    evidential = rset.evidential()
    n = len(evidential)
    outcome = draw_outcome(rset.query.id, seed, n)

    documents = list(rset.documents)
    corrupted_doc_id = original_span = replacement_span = failure = None
    if outcome >= 1:
        target = evidential[outcome - 1]
        record_seed = stable_hash64("corrupt", seed, rset.query.id)
        try:
            corrupted, (original_span, replacement_span) = corrupt_document(
                target, rset.query.answers, corruptor, record_seed, max_attempts)
            documents[documents.index(target)] = corrupted
            corrupted_doc_id = target.doc.doc_id
        except (CorruptionFailed, CorruptorError) as exc:
            log.warning("corruption failed for %s: %s; falling back to outcome 0",
                        rset.query.id, exc)
            failure = str(exc)
            outcome = 0
            original_span = replacement_span = None

    decision = AugmentationDecision(
        query_id=rset.query.id,
        n_evidential=n,
        outcome=outcome,
        seed=seed,
        corruptor_id=corruptor.identity,
        corrupted_doc_id=corrupted_doc_id,
        original_span=original_span,
        replacement_span=replacement_span,
        failure=failure,
    )
    return AugmentedSet(query=rset.query, documents=documents, decision=decision, base=rset)
