"""Benchmark subset construction from classified and augmented records.

Three constructions: the answer-preservation subset (records keeping at
least one evidential document), the noise-type subset (records holding all
three document types) with its per-record three-scenario cases, and seeded
per-evidential-count strata.
"""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from .augment import stable_hash64
from .classify import dataset_stats
from .models import (
    AugmentedSet,
    BenchmarkManifest,
    LabeledDocument,
    NoiseKind,
    RetrievalSet,
    ScenarioCase,
    ScenarioKind,
    SubsetStats,
)

SCENARIO_NOISE = {
    ScenarioKind.WITH_IRRELEVANT: NoiseKind.IRRELEVANT,
    ScenarioKind.WITH_FACTUAL_ERROR: NoiseKind.FACTUAL_ERROR,
}


def _source_tag(sets: Sequence[AugmentedSet] | Sequence[RetrievalSet]) -> str:
    return sets[0].query.dataset_tag if sets else ""


def _label_kinds(aset: AugmentedSet) -> set[NoiseKind]:
    return {d.label.kind for d in aset.documents}


def build_par_subset(sets: Iterable[AugmentedSet]) -> tuple[list[AugmentedSet], BenchmarkManifest]:
    """Keep records with at least one document still evidential after
    augmentation; the summary of such a record can preserve the answer."""
    items = list(sets)
    subset = [s for s in items if s.evidential()]
    stats = dataset_stats(items, lambda s: bool(s.evidential()))
    manifest = BenchmarkManifest(name="par_subset", source_tag=_source_tag(items),
                                 seed=None, stats=stats)
    return subset, manifest


def build_noise_type_subset(sets: Iterable[AugmentedSet]) -> tuple[list[AugmentedSet], BenchmarkManifest]:
    """Keep records holding all three document types at once."""
    items = list(sets)
    wanted = {NoiseKind.EVIDENTIAL, NoiseKind.IRRELEVANT, NoiseKind.FACTUAL_ERROR}
    subset = [s for s in items if wanted <= _label_kinds(s)]
    stats = dataset_stats(items, lambda s: wanted <= _label_kinds(s))
    manifest = BenchmarkManifest(name="noise_type_subset", source_tag=_source_tag(items),
                                 seed=None, stats=stats)
    return subset, manifest


def _best_of_kind(aset: AugmentedSet, kind: NoiseKind) -> LabeledDocument:
    docs = [d for d in aset.documents if d.label.kind is kind]
    if not docs:
        raise ValueError(f"record {aset.query.id!r} has no {kind.value} document")
    return min(docs, key=lambda d: d.doc.rank)


def build_scenarios(aset: AugmentedSet) -> list[ScenarioCase]:
    """Emit the three evaluation cases for one all-three-types record.

    Each case takes the highest-ranked document of the relevant types; the
    evidential document is the same across all three.
    """
    evidential = _best_of_kind(aset, NoiseKind.EVIDENTIAL)
    cases = [ScenarioCase(query=aset.query, kind=ScenarioKind.EVIDENTIAL_ONLY,
                          documents=[evidential])]
    for kind, noise_kind in SCENARIO_NOISE.items():
        noise = _best_of_kind(aset, noise_kind)
        cases.append(ScenarioCase(query=aset.query, kind=kind,
                                  documents=[evidential, noise]))
    return cases


def build_all_scenarios(subset: Iterable[AugmentedSet]) -> tuple[list[ScenarioCase], BenchmarkManifest]:
    items = list(subset)
    cases = [case for aset in items for case in build_scenarios(aset)]
    stats = dataset_stats(items, lambda _: True)
    manifest = BenchmarkManifest(name="scenarios", source_tag=_source_tag(items),
                                 seed=None, stats=stats,
                                 parameters={"cases": len(cases), "cases_per_record": 3})
    return cases, manifest


def stratify_by_evidential_count(
    sets: Iterable[RetrievalSet], sample_size: int, seed: int,
) -> tuple[dict[int, list[RetrievalSet]], BenchmarkManifest]:
    """Group pre-augmentation records by evidential-document count and draw a
    seeded sample per group, without replacement.

    Groups smaller than sample_size are taken whole and noted as shortfalls
    in the manifest.
    """
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    items = list(sets)
    groups: dict[int, list[RetrievalSet]] = {}
    for rset in items:
        groups.setdefault(len(rset.evidential()), []).append(rset)

    sampled: dict[int, list[RetrievalSet]] = {}
    shortfalls: dict[str, int] = {}
    for n in sorted(groups):
        members = groups[n]
        rng = random.Random(stable_hash64("stratum", seed, n))
        order = list(range(len(members)))
        rng.shuffle(order)
        take = order[:sample_size]
        sampled[n] = [members[i] for i in sorted(take)]
        if len(members) < sample_size:
            shortfalls[str(n)] = len(members)

    total = sum(len(v) for v in sampled.values())
    stats = SubsetStats(full=len(items), subset=total,
                        percentage=round(100 * total / len(items), 2) if items else 0.0)
    manifest = BenchmarkManifest(
        name="evidential_strata", source_tag=_source_tag(items), seed=seed, stats=stats,
        parameters={"sample_size": sample_size,
                    "strata": {str(n): len(v) for n, v in sampled.items()},
                    "shortfalls": shortfalls})
    return sampled, manifest
