"""Line-delimited dataset files: loading, validation, and atomic writing.

Schemas (one JSON object per line, UTF-8):

retrieval dump / classified / augmented record
    {"id", "question", "answers": [..], "dataset": str,
     "ctxs": [{"id", "title"?, "text", "rank", "score"?,
               "label"?, "provenance"?}, ..],
     "augmentation"?: {"outcome", "seed", "corruptor",
                       "corrupted_doc_id"?, "original_span"?,
                       "replacement_span"?, "failure"?},
     "scenario"?: str, "stratum"?: int}

train example
    {"id", "question", "documents": [{"text", "label", "rank"}, ..],
     "summary": str, "teacher": str, "mode": str}
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator, Literal

from .models import (
    AugmentationDecision,
    AugmentedSet,
    LabeledDocument,
    NoiseKind,
    NoiseLabel,
    Provenance,
    QueryRecord,
    RetrievalSet,
    RetrievedDocument,
)
from .normalize import normalize_text

log = logging.getLogger(__name__)

OnError = Literal["raise", "skip"]


class DatasetValidationError(ValueError):
    """A record failed schema validation; carries file, line and field."""

    def __init__(self, message: str, *, path: str | os.PathLike[str] | None = None,
                 line: int | None = None, field: str | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        self.field = field
        where = []
        if self.path is not None:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{': '.join(where)}] " if where else ""
        super().__init__(prefix + message)


def _require(obj: dict[str, Any], key: str, kind: type | tuple[type, ...], *,
             path: Any, line: int | None) -> Any:
    if key not in obj:
        raise DatasetValidationError("missing required field", path=path, line=line, field=key)
    value = obj[key]
    if not isinstance(value, kind):
        raise DatasetValidationError(
            f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}",
            path=path, line=line, field=key)
    return value


def parse_query(obj: dict[str, Any], *, path: Any = None, line: int | None = None) -> QueryRecord:
    qid = _require(obj, "id", str, path=path, line=line)
    question = _require(obj, "question", str, path=path, line=line)
    answers = _require(obj, "answers", list, path=path, line=line)
    if not answers:
        raise DatasetValidationError("answers must be non-empty", path=path, line=line, field="answers")
    for a in answers:
        if not isinstance(a, str):
            raise DatasetValidationError("answers must be strings", path=path, line=line, field="answers")
        if not normalize_text(a):
            raise DatasetValidationError(
                f"alias {a!r} is empty after normalization", path=path, line=line, field="answers")
    dataset_tag = obj.get("dataset", "")
    if not isinstance(dataset_tag, str):
        raise DatasetValidationError("dataset must be a string", path=path, line=line, field="dataset")
    return QueryRecord(id=qid, question=question, answers=list(answers), dataset_tag=dataset_tag)


def parse_ctx(obj: dict[str, Any], *, path: Any = None, line: int | None = None) -> RetrievedDocument:
    doc_id = str(_require(obj, "id", (str, int), path=path, line=line))
    text = _require(obj, "text", str, path=path, line=line)
    if not text:
        raise DatasetValidationError("document text must be non-empty", path=path, line=line, field="text")
    rank = _require(obj, "rank", int, path=path, line=line)
    if isinstance(rank, bool) or rank < 1:
        raise DatasetValidationError("rank must be an integer >= 1", path=path, line=line, field="rank")
    title = obj.get("title")
    if title is not None and not isinstance(title, str):
        raise DatasetValidationError("title must be a string", path=path, line=line, field="title")
    score = obj.get("score")
    if score is not None and not isinstance(score, (int, float)):
        raise DatasetValidationError("score must be a number", path=path, line=line, field="score")
    return RetrievedDocument(doc_id=doc_id, text=text, rank=rank, title=title,
                             score=float(score) if score is not None else None)


def parse_label(obj: dict[str, Any], *, path: Any = None, line: int | None = None) -> NoiseLabel:
    kind = _require(obj, "label", str, path=path, line=line)
    provenance = _require(obj, "provenance", str, path=path, line=line)
    try:
        return NoiseLabel(NoiseKind(kind), Provenance(provenance))
    except ValueError as exc:
        raise DatasetValidationError(str(exc), path=path, line=line, field="label") from exc


def _check_ranks_unique(docs: list[RetrievedDocument], *, path: Any, line: int | None) -> None:
    seen: set[int] = set()
    for d in docs:
        if d.rank in seen:
            raise DatasetValidationError(f"duplicate rank {d.rank}", path=path, line=line, field="rank")
        seen.add(d.rank)


def iter_jsonl(path: str | os.PathLike[str]) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (line_number, object) for every non-blank line."""
    with open(path, "r", encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DatasetValidationError(f"invalid JSON: {exc.msg}", path=path, line=n) from exc
            if not isinstance(obj, dict):
                raise DatasetValidationError("record must be a JSON object", path=path, line=n)
            yield n, obj


def _guarded(path: Any, on_error: OnError,
             parse: Callable[[int, dict[str, Any]], Any]) -> Iterator[Any]:
    seen_ids: set[str] = set()
    for n, obj in iter_jsonl(path):
        try:
            item = parse(n, obj)
            qid = item.query.id if hasattr(item, "query") else item[0].id
            if qid in seen_ids:
                raise DatasetValidationError(f"duplicate record id {qid!r}", path=path, line=n, field="id")
            seen_ids.add(qid)
        except DatasetValidationError as exc:
            if on_error == "raise":
                raise
            log.warning("skipping record: %s", exc)
            continue
        yield item


def load_retrieval_dump(path: str | os.PathLike[str], *, on_error: OnError = "raise",
                        k: int | None = None) -> Iterator[tuple[QueryRecord, list[RetrievedDocument]]]:
    """Stream (query, documents) pairs from a raw retrieval dump.

    Documents are sorted by ascending rank and truncated to the top-k when k
    is given. Malformed records raise or are skipped with a logged warning.
    """

    def parse(n: int, obj: dict[str, Any]) -> tuple[QueryRecord, list[RetrievedDocument]]:
        query = parse_query(obj, path=path, line=n)
        ctxs = _require(obj, "ctxs", list, path=path, line=n)
        if not ctxs:
            raise DatasetValidationError("ctxs must be non-empty", path=path, line=n, field="ctxs")
        docs = [parse_ctx(c, path=path, line=n) for c in ctxs]
        _check_ranks_unique(docs, path=path, line=n)
        docs.sort(key=lambda d: d.rank)
        if k is not None:
            docs = docs[:k]
        return query, docs

    return _guarded(path, on_error, parse)


def _parse_labeled_record(obj: dict[str, Any], *, path: Any, line: int) -> RetrievalSet:
    query = parse_query(obj, path=path, line=line)
    ctxs = _require(obj, "ctxs", list, path=path, line=line)
    if not ctxs:
        raise DatasetValidationError("ctxs must be non-empty", path=path, line=line, field="ctxs")
    docs = []
    for c in ctxs:
        doc = parse_ctx(c, path=path, line=line)
        label = parse_label(c, path=path, line=line)
        docs.append(LabeledDocument(doc=doc, label=label))
    _check_ranks_unique([d.doc for d in docs], path=path, line=line)
    docs.sort(key=lambda d: d.doc.rank)
    return RetrievalSet(query=query, documents=docs)


def load_classified(path: str | os.PathLike[str], *, on_error: OnError = "raise") -> Iterator[RetrievalSet]:
    """Stream labeled retrieval sets from a classified (or scenario/stratum) file."""

    def parse(n: int, obj: dict[str, Any]) -> RetrievalSet:
        return _parse_labeled_record(obj, path=path, line=n)

    return _guarded(path, on_error, parse)


def load_augmented(path: str | os.PathLike[str], *, on_error: OnError = "raise") -> Iterator[AugmentedSet]:
    """Stream augmented sets; `base` is None for sets read back from disk."""

    def parse(n: int, obj: dict[str, Any]) -> AugmentedSet:
        rset = _parse_labeled_record(obj, path=path, line=n)
        aug = _require(obj, "augmentation", dict, path=path, line=n)
        try:
            decision = AugmentationDecision(
                query_id=rset.query.id,
                n_evidential=int(aug["n_evidential"]),
                outcome=int(aug["outcome"]),
                seed=int(aug["seed"]),
                corruptor_id=str(aug["corruptor"]),
                corrupted_doc_id=aug.get("corrupted_doc_id"),
                original_span=aug.get("original_span"),
                replacement_span=aug.get("replacement_span"),
                failure=aug.get("failure"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetValidationError(f"bad augmentation block: {exc}",
                                         path=path, line=n, field="augmentation") from exc
        return AugmentedSet(query=rset.query, documents=rset.documents,
                            decision=decision, base=None)

    return _guarded(path, on_error, parse)


def ctx_dict(doc: LabeledDocument) -> dict[str, Any]:
    out: dict[str, Any] = {"id": doc.doc.doc_id}
    if doc.doc.title is not None:
        out["title"] = doc.doc.title
    out["text"] = doc.doc.text
    out["rank"] = doc.doc.rank
    if doc.doc.score is not None:
        out["score"] = doc.doc.score
    out["label"] = doc.label.kind.value
    out["provenance"] = doc.label.provenance.value
    return out


def record_dict(query: QueryRecord, documents: list[LabeledDocument],
                decision: AugmentationDecision | None = None,
                extra: dict[str, Any] | None = None) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": query.id,
        "question": query.question,
        "answers": list(query.answers),
        "dataset": query.dataset_tag,
        "ctxs": [ctx_dict(d) for d in documents],
    }
    if decision is not None:
        aug: dict[str, Any] = {
            "outcome": decision.outcome,
            "n_evidential": decision.n_evidential,
            "seed": decision.seed,
            "corruptor": decision.corruptor_id,
        }
        if decision.corrupted_doc_id is not None:
            aug["corrupted_doc_id"] = decision.corrupted_doc_id
        if decision.original_span is not None:
            aug["original_span"] = decision.original_span
        if decision.replacement_span is not None:
            aug["replacement_span"] = decision.replacement_span
        if decision.failure is not None:
            aug["failure"] = decision.failure
        out["augmentation"] = aug
    if extra:
        out.update(extra)
    return out


def dump_line(obj: dict[str, Any]) -> str:
    return json.dumps(obj, ensure_ascii=False) + "\n"


@contextmanager
def atomic_writer(path: str | os.PathLike[str]) -> Iterator[Any]:
    """Write to a temp file in the target directory, rename into place on success."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name + ".", suffix=".tmp")
    fh = os.fdopen(fd, "w", encoding="utf-8", newline="\n")
    try:
        yield fh
        fh.close()
        os.replace(tmp, target)
    except BaseException:
        fh.close()
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_jsonl(path: str | os.PathLike[str], lines: Iterator[dict[str, Any]] | list[dict[str, Any]]) -> int:
    n = 0
    with atomic_writer(path) as fh:
        for obj in lines:
            fh.write(dump_line(obj))
            n += 1
    return n


def write_json(path: str | os.PathLike[str], obj: Any) -> None:
    with atomic_writer(path) as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
