"""Noise-aware context compression pipeline for retrieval-augmented QA.

Classifies retrieved documents by noise type, injects seeded factual-error
documents, distills evidential-only teacher summaries into training data,
builds noise-controlled benchmarks, and scores answers and summaries.
"""

from .models import (
    AnswerOutcome,
    AugmentationDecision,
    AugmentedSet,
    BenchmarkManifest,
    CompressionOutput,
    LabelMode,
    LabeledDocument,
    NoiseKind,
    NoiseLabel,
    Provenance,
    QueryRecord,
    RetrievalSet,
    RetrievedDocument,
    ScenarioCase,
    ScenarioKind,
    SubsetStats,
    SummaryLabel,
    TrainExample,
)
from .normalize import contains_answer, find_answer_span, norm_tokens, normalize_text

__version__ = "0.1.0"

__all__ = [
    "AnswerOutcome",
    "AugmentationDecision",
    "AugmentedSet",
    "BenchmarkManifest",
    "CompressionOutput",
    "LabelMode",
    "LabeledDocument",
    "NoiseKind",
    "NoiseLabel",
    "Provenance",
    "QueryRecord",
    "RetrievalSet",
    "RetrievedDocument",
    "ScenarioCase",
    "ScenarioKind",
    "SubsetStats",
    "SummaryLabel",
    "TrainExample",
    "contains_answer",
    "find_answer_span",
    "norm_tokens",
    "normalize_text",
    "__version__",
]
