"""Teacher pseudo-labeling and training-example assembly.

The teacher summarizes only documents still labeled evidential after
augmentation; records with no evidential documents make no teacher call and
are either skipped or given a fixed abstention sentinel, per policy.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Iterable, Sequence

from .gateway import ChatClient, ChatError, ChatRequest
from .models import AugmentedSet, LabelMode, SummaryLabel, TrainExample
from .prompts import default_compress_instruction

log = logging.getLogger(__name__)

SENTINEL_LABEL = "No relevant information found."

EMPTY_POLICIES = ("skip", "sentinel")


class LabelingError(Exception):
    """A teacher call for one record failed past the client's retry policy."""

    def __init__(self, query_id: str, cause: Exception):
        self.query_id = query_id
        super().__init__(f"labeling record {query_id!r} failed: {cause}")


def format_documents(texts: Sequence[str]) -> str:
    return "\n\n".join(f"Document {i}: {text}" for i, text in enumerate(texts, start=1))


def build_teacher_prompt(model_id: str, instruction: str, texts: Sequence[str],
                         question: str, *, max_output_tokens: int = 256) -> ChatRequest:
    """Assemble the summarization request: documents in the given order, then
    the question. Byte-deterministic for fixed inputs."""
    if not texts:
        raise ValueError("teacher prompt requires at least one document")
    user_prompt = f"{format_documents(texts)}\n\nQuestion: {question}"
    return ChatRequest(model_id=model_id, system_prompt=instruction,
                       user_prompt=user_prompt, max_output_tokens=max_output_tokens)


def generate_label(aset: AugmentedSet, mode: LabelMode, client: ChatClient,
                   instruction: str | None = None,
                   max_output_tokens: int = 256) -> SummaryLabel:
    """Summarize one record with the teacher.

    EvidentialOnly shows the teacher only post-augmentation evidential
    documents; AllDocs shows every retrieved document. No evidential
    documents in EvidentialOnly mode means no call at all.
    """
    if mode is LabelMode.EVIDENTIAL_ONLY:
        shown = aset.evidential()
    else:
        shown = list(aset.documents)
    if not shown:
        return SummaryLabel(teacher_model=client.model_id, mode=mode, evidential_empty=True)

    req = build_teacher_prompt(
        client.model_id,
        instruction if instruction is not None else default_compress_instruction(),
        [d.doc.text for d in shown], aset.query.question,
        max_output_tokens=max_output_tokens)
    try:
        text = client.chat_complete(req)
    except ChatError as exc:
        raise LabelingError(aset.query.id, exc) from exc
    return SummaryLabel(teacher_model=client.model_id, mode=mode, text=text,
                        source_doc_ids=[d.doc.doc_id for d in shown])


def build_train_dataset(sets: Iterable[AugmentedSet], client: ChatClient, *,
                        mode: LabelMode = LabelMode.EVIDENTIAL_ONLY,
                        empty_policy: str = "skip",
                        instruction: str | None = None,
                        max_output_tokens: int = 256,
                        max_workers: int = 4) -> tuple[list[TrainExample], dict[str, Any]]:
    """Label a stream of augmented records and assemble training examples.

    Records are labeled concurrently (the client bounds actual in-flight
    calls) and emitted in input order. Returns the examples plus a report:
    emitted / skipped_empty_evidential / corruption_fallbacks / failed counts
    and per-record failure reasons.
    """
    if empty_policy not in EMPTY_POLICIES:
        raise ValueError(f"empty_policy must be one of {EMPTY_POLICIES}")
    items = list(sets)

    def label_one(aset: AugmentedSet) -> SummaryLabel | LabelingError:
        try:
            return generate_label(aset, mode, client, instruction=instruction,
                                  max_output_tokens=max_output_tokens)
        except LabelingError as exc:
            return exc

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        labels = list(pool.map(label_one, items))

    examples: list[TrainExample] = []
    skipped_empty = 0
    fallbacks = 0
    failures: list[dict[str, str]] = []
    for aset, label in zip(items, labels):
        if aset.decision.failure is not None:
            fallbacks += 1
        if isinstance(label, LabelingError):
            log.warning("skipping record %s: %s", aset.query.id, label)
            failures.append({"id": aset.query.id, "reason": str(label)})
            continue
        if label.evidential_empty and empty_policy == "skip":
            skipped_empty += 1
            continue
        examples.append(TrainExample(query=aset.query, documents=list(aset.documents), label=label))

    report = {
        "emitted": len(examples),
        "skipped_empty_evidential": skipped_empty,
        "corruption_fallbacks": fallbacks,
        "failed": len(failures),
        "failures": failures,
        "mode": mode.value,
        "empty_policy": empty_policy,
    }
    return examples, report


def train_record_dict(ex: TrainExample) -> dict[str, Any]:
    """Serialize one training example; empty-evidential labels surface as the
    abstention sentinel."""
    summary = SENTINEL_LABEL if ex.label.evidential_empty else ex.label.text
    assert summary is not None
    return {
        "id": ex.query.id,
        "question": ex.query.question,
        "documents": [
            {"text": d.doc.text, "label": d.label.kind.value, "rank": d.doc.rank}
            for d in ex.documents
        ],
        "summary": summary,
        "teacher": ex.label.teacher_model,
        "mode": ex.label.mode.value,
    }
