"""Domain types shared across the pipeline stages."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class NoiseKind(str, Enum):
    EVIDENTIAL = "evidential"
    IRRELEVANT = "irrelevant"
    FACTUAL_ERROR = "factual_error"


class Provenance(str, Enum):
    NATURAL = "natural"
    AUGMENTED = "augmented"


class LabelMode(str, Enum):
    EVIDENTIAL_ONLY = "evidential_only"
    ALL_DOCS = "all_docs"


class ScenarioKind(str, Enum):
    EVIDENTIAL_ONLY = "evidential_only"
    WITH_IRRELEVANT = "with_irrelevant"
    WITH_FACTUAL_ERROR = "with_factual_error"


@dataclass(frozen=True)
class QueryRecord:
    id: str
    question: str
    answers: list[str]
    dataset_tag: str = ""


@dataclass(frozen=True)
class RetrievedDocument:
    doc_id: str
    text: str
    rank: int
    title: str | None = None
    score: float | None = None


@dataclass(frozen=True)
class NoiseLabel:
    kind: NoiseKind
    provenance: Provenance

    def __post_init__(self) -> None:
        if self.kind is NoiseKind.FACTUAL_ERROR and self.provenance is not Provenance.AUGMENTED:
            raise ValueError("factual_error labels exist only by construction (provenance=augmented)")


@dataclass(frozen=True)
class LabeledDocument:
    doc: RetrievedDocument
    label: NoiseLabel


@dataclass(frozen=True)
class RetrievalSet:
    query: QueryRecord
    documents: list[LabeledDocument]

    def evidential(self) -> list[LabeledDocument]:
        return [d for d in self.documents if d.label.kind is NoiseKind.EVIDENTIAL]


@dataclass(frozen=True)
class AugmentationDecision:
    query_id: str
    n_evidential: int
    outcome: int
    seed: int
    corruptor_id: str
    corrupted_doc_id: str | None = None
    original_span: str | None = None
    replacement_span: str | None = None
    failure: str | None = None

    def __post_init__(self) -> None:
        if (self.outcome == 0) != (self.corrupted_doc_id is None):
            raise ValueError("outcome=0 iff no document was corrupted")
        if self.n_evidential == 0 and self.outcome != 0:
            raise ValueError("cannot corrupt when no evidential documents exist")
        if not 0 <= self.outcome <= self.n_evidential:
            raise ValueError("outcome out of range")


@dataclass(frozen=True)
class AugmentedSet:
    """A retrieval set after seeded corruption.

    `base` is the pre-corruption set when produced by `augment_set`; sets
    loaded back from disk carry base=None (original text of the corrupted
    document is not kept in the file).
    """

    query: QueryRecord
    documents: list[LabeledDocument]
    decision: AugmentationDecision
    base: RetrievalSet | None = None

    def evidential(self) -> list[LabeledDocument]:
        return [d for d in self.documents if d.label.kind is NoiseKind.EVIDENTIAL]


@dataclass(frozen=True)
class SummaryLabel:
    teacher_model: str
    mode: LabelMode
    text: str | None = None
    source_doc_ids: list[str] = field(default_factory=list)
    evidential_empty: bool = False

    def __post_init__(self) -> None:
        if self.evidential_empty and (self.text is not None or self.source_doc_ids):
            raise ValueError("empty-evidential labels carry no text and no source docs")


@dataclass(frozen=True)
class TrainExample:
    query: QueryRecord
    documents: list[LabeledDocument]
    label: SummaryLabel


@dataclass(frozen=True)
class ScenarioCase:
    query: QueryRecord
    kind: ScenarioKind
    documents: list[LabeledDocument]


@dataclass(frozen=True)
class CompressionOutput:
    query_id: str
    summary: str
    original_token_count: int
    compressed_token_count: int
    compressor_id: str


@dataclass(frozen=True)
class AnswerOutcome:
    query_id: str
    predicted: str
    seconds: float


@dataclass(frozen=True)
class SubsetStats:
    full: int
    subset: int
    percentage: float

    def as_dict(self) -> dict[str, Any]:
        return {"full": self.full, "subset": self.subset, "percentage": self.percentage}


@dataclass(frozen=True)
class BenchmarkManifest:
    name: str
    source_tag: str
    seed: int | None
    stats: SubsetStats
    parameters: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "source_tag": self.source_tag,
            "seed": self.seed,
            "counts": self.stats.as_dict(),
            "parameters": self.parameters,
        }
