"""Document noise-type classification and subset statistics."""

from __future__ import annotations

from typing import Callable, Iterable, Sequence, TypeVar

from .models import (
    LabeledDocument,
    NoiseKind,
    NoiseLabel,
    Provenance,
    QueryRecord,
    RetrievalSet,
    RetrievedDocument,
    SubsetStats,
)
from .normalize import contains_answer

T = TypeVar("T")

_EVIDENTIAL = NoiseLabel(NoiseKind.EVIDENTIAL, Provenance.NATURAL)
_IRRELEVANT = NoiseLabel(NoiseKind.IRRELEVANT, Provenance.NATURAL)


def classify_documents(query: QueryRecord, docs: Sequence[RetrievedDocument]) -> RetrievalSet:
    """Label each retrieved document evidential or irrelevant (never factual_error).

    A document is evidential iff its text contains some answer alias under
    normalization; everything else is irrelevant. Labels carry natural
    provenance. Duplicate ranks are a caller error.
    """
    seen_ranks: set[int] = set()
    for d in docs:
        if d.rank in seen_ranks:
            raise ValueError(f"duplicate rank {d.rank} in retrieval set for query {query.id!r}")
        seen_ranks.add(d.rank)
    labeled = [
        LabeledDocument(doc=d, label=_EVIDENTIAL if contains_answer(d.text, query.answers) else _IRRELEVANT)
        for d in sorted(docs, key=lambda d: d.rank)
    ]
    if not labeled:
        raise ValueError(f"retrieval set for query {query.id!r} is empty")
    return RetrievalSet(query=query, documents=labeled)


def dataset_stats(items: Iterable[T], predicate: Callable[[T], bool]) -> SubsetStats:
    """Count items satisfying `predicate`; percentage = 100*subset/full to 2 decimals."""
    full = 0
    subset = 0
    for item in items:
        full += 1
        if predicate(item):
            subset += 1
    percentage = round(100.0 * subset / full, 2) if full else 0.0
    return SubsetStats(full=full, subset=subset, percentage=percentage)
