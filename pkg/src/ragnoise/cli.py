"""Pipeline orchestration.

Stages compose through files so any one can be re-run alone:

    classify      retrieval dump -> classified records
    augment       classified -> augmented (seeded factual-error injection)
    label         augmented -> teacher summary labels
    build-train   augmented + labels -> training examples
    build-bench   augmented + classified -> benchmark subsets + scenarios + strata
    compress      any labeled record file -> summaries via a compressor adapter
    answer        any labeled record file (+ optional summaries) -> predictions
    score         records + predictions (+ summaries) -> metrics JSON
    report        metrics JSON(s) -> combined report (JSON + text table)

Every command writes a `<output>.manifest.json` recording config hash, input
digests, seed, tool version, and counts.
"""

from __future__ import annotations

import json
import logging
import sys
import time
from pathlib import Path
from typing import Any

import click

from . import __version__
from .augment import DEFAULT_MAX_ATTEMPTS, DistractorPool, FillMaskCorruptor, augment_set
from .benchbuilder import (
    build_all_scenarios,
    build_noise_type_subset,
    build_par_subset,
    stratify_by_evidential_count,
)
from .classify import classify_documents, dataset_stats
from .conformance import all_passed, render_results, run_conformance
from .dataio import (
    DatasetValidationError,
    iter_jsonl,
    load_augmented,
    load_classified,
    load_retrieval_dump,
    record_dict,
    write_json,
    write_jsonl,
)
from .evaluator import (
    MetricsReport,
    aggregate,
    count_tokens,
    degradation_delta,
    render_delta,
    render_report,
)
from .gateway import ChatClient, ChatError, ResponseCache, make_compressor
from .labeler import (
    SENTINEL_LABEL,
    LabelingError,
    generate_label,
    train_record_dict,
)
from .manifest import build_run_manifest, write_run_manifest
from .models import (
    AnswerOutcome,
    AugmentedSet,
    CompressionOutput,
    LabelMode,
    NoiseKind,
    QueryRecord,
    RetrievalSet,
    SummaryLabel,
    TrainExample,
)

log = logging.getLogger(__name__)


def _fail(exc: Exception) -> "click.ClickException":
    return click.ClickException(str(exc))


def _write_manifest(out: Path, command: str, params: dict[str, Any],
                    inputs: list[Path], counts: dict[str, Any],
                    seed: int | None = None) -> None:
    manifest = build_run_manifest(command, params, inputs, counts, __version__, seed=seed)
    write_run_manifest(out.with_name(out.name + ".manifest.json"), manifest)


def _client_options(fn):
    fn = click.option("--base-url", default="mock:", show_default=True,
                      help="Chat endpoint base URL; the mock: scheme runs offline.")(fn)
    fn = click.option("--model", "model_id", default="mock-model", show_default=True,
                      help="Model id sent to the endpoint.")(fn)
    fn = click.option("--credential-env", default="RAGNOISE_API_KEY", show_default=True,
                      help="Environment variable holding the API credential.")(fn)
    fn = click.option("--cache-dir", type=click.Path(path_type=Path), default=None,
                      help="Response cache directory (re-runs become free).")(fn)
    fn = click.option("--max-in-flight", default=4, show_default=True,
                      help="Cap on simultaneous endpoint calls.")(fn)
    return fn


def _make_client(base_url: str, model_id: str, credential_env: str,
                 cache_dir: Path | None, max_in_flight: int) -> ChatClient:
    cache = ResponseCache(cache_dir) if cache_dir is not None else ResponseCache()
    return ChatClient(base_url, model_id, credential_env=credential_env,
                      cache=cache, max_in_flight=max_in_flight)


@click.group()
@click.version_option(version=__version__, prog_name="ragnoise")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose: bool) -> None:
    """Noise-aware context compression pipeline for retrieval-augmented QA."""
    logging.basicConfig(stream=sys.stderr,
                        level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.argument("output_path", type=click.Path(path_type=Path))
@click.option("--k", default=5, show_default=True, help="Keep the top-k documents per query.")
@click.option("--on-error", type=click.Choice(["raise", "skip"]), default="raise",
              show_default=True, help="What to do with malformed records.")
def classify(input_path: Path, output_path: Path, k: int, on_error: str) -> None:
    """Label each retrieved document evidential or irrelevant.

    INPUT_PATH: retrieval dump, one JSON object per line:
    {"id", "question", "answers": [..], "dataset"?, "ctxs": [{"id", "title"?,
    "text", "rank", "score"?}, ..]}.  Writes the same records with "label"
    and "provenance" added to every ctx.
    """
    try:
        sets = [classify_documents(q, docs)
                for q, docs in load_retrieval_dump(input_path, on_error=on_error, k=k)]  # type: ignore[arg-type]
        n = write_jsonl(output_path, (record_dict(s.query, s.documents) for s in sets))
    except (DatasetValidationError, OSError, ValueError) as exc:
        raise _fail(exc)
    with_evidential = dataset_stats(sets, lambda s: bool(s.evidential()))
    doc_labels = [d.label.kind for s in sets for d in s.documents]
    counts = {
        "records": n,
        "documents": len(doc_labels),
        "evidential_docs": sum(1 for x in doc_labels if x is NoiseKind.EVIDENTIAL),
        "irrelevant_docs": sum(1 for x in doc_labels if x is NoiseKind.IRRELEVANT),
        "with_evidential": with_evidential.as_dict(),
    }
    _write_manifest(output_path, "classify",
                    {"k": k, "on_error": on_error, "input": str(input_path)},
                    [input_path], counts)
    click.echo(f"classified {n} records -> {output_path}")


@main.command()
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.argument("output_path", type=click.Path(path_type=Path))
@click.option("--seed", required=True, type=int, help="Run seed; per-record draws derive from it.")
@click.option("--corruptor", "corruptor_spec", default="distractor", show_default=True,
              help="distractor (offline, answers of other queries) or fillmask:<url>.")
@click.option("--max-attempts", default=DEFAULT_MAX_ATTEMPTS, show_default=True,
              help="Replacement candidates tried before giving up on a record.")
def augment(input_path: Path, output_path: Path, seed: int,
            corruptor_spec: str, max_attempts: int) -> None:
    """Corrupt at most one evidential document per record into a factual error.

    INPUT_PATH: classified records. The outcome for each record is drawn
    uniformly over {none, doc 1, .., doc N} from (seed, record id, N), so
    re-runs and partitioned runs agree. Writes records with an
    "augmentation" block describing what happened.
    """
    try:
        sets = list(load_classified(input_path))
        if corruptor_spec == "distractor":
            corruptor = DistractorPool.from_queries([s.query for s in sets])
        elif corruptor_spec.startswith("fillmask:"):
            corruptor = FillMaskCorruptor(corruptor_spec.split(":", 1)[1])
        else:
            raise click.ClickException(
                f"unknown corruptor {corruptor_spec!r} (expected distractor or fillmask:<url>)")
        augmented = [augment_set(s, seed, corruptor, max_attempts=max_attempts) for s in sets]
        n = write_jsonl(output_path,
                        (record_dict(a.query, a.documents, decision=a.decision) for a in augmented))
    except (DatasetValidationError, OSError, ValueError) as exc:
        raise _fail(exc)
    counts = {
        "records": n,
        "corrupted": sum(1 for a in augmented if a.decision.outcome > 0),
        "left_clean": sum(1 for a in augmented if a.decision.outcome == 0 and not a.decision.failure),
        "failures": sum(1 for a in augmented if a.decision.failure),
    }
    _write_manifest(output_path, "augment",
                    {"seed": seed, "corruptor": corruptor_spec,
                     "max_attempts": max_attempts, "input": str(input_path)},
                    [input_path], counts, seed=seed)
    click.echo(f"augmented {n} records ({counts['corrupted']} corrupted) -> {output_path}")


@main.command()
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.argument("output_path", type=click.Path(path_type=Path))
@click.option("--mode", type=click.Choice([m.value for m in LabelMode]),
              default=LabelMode.EVIDENTIAL_ONLY.value, show_default=True,
              help="Which documents the teacher sees.")
@click.option("--instruction-file", type=click.Path(exists=True, path_type=Path), default=None,
              help="Override the built-in summarization instruction.")
@click.option("--max-output-tokens", default=256, show_default=True)
@_client_options
def label(input_path: Path, output_path: Path, mode: str, instruction_file: Path | None,
          max_output_tokens: int, base_url: str, model_id: str, credential_env: str,
          cache_dir: Path | None, max_in_flight: int) -> None:
    """Generate teacher summary labels for augmented records.

    INPUT_PATH: augmented records. Writes one line per successfully labeled
    record: {"id", "teacher", "mode", "evidential_empty", "summary"?,
    "source_doc_ids"}. Records with no evidential documents get
    evidential_empty=true and cost no endpoint call.
    """
    from .prompts import default_compress_instruction, load_instruction

    label_mode = LabelMode(mode)
    client = _make_client(base_url, model_id, credential_env, cache_dir, max_in_flight)
    try:
        instruction = load_instruction(instruction_file, default_compress_instruction())
        sets = list(load_augmented(input_path))
    except (DatasetValidationError, OSError, ValueError) as exc:
        raise _fail(exc)

    from concurrent.futures import ThreadPoolExecutor

    def label_one(aset: AugmentedSet) -> SummaryLabel | LabelingError:
        try:
            return generate_label(aset, label_mode, client, instruction=instruction,
                                  max_output_tokens=max_output_tokens)
        except LabelingError as exc:
            return exc

    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        labels = list(pool.map(label_one, sets))
    client.close()

    lines: list[dict[str, Any]] = []
    failures: list[dict[str, str]] = []
    empty = 0
    for aset, lab in zip(sets, labels):
        if isinstance(lab, LabelingError):
            log.warning("labeling failed: %s", lab)
            failures.append({"id": aset.query.id, "reason": str(lab)})
            continue
        entry: dict[str, Any] = {
            "id": aset.query.id,
            "teacher": lab.teacher_model,
            "mode": lab.mode.value,
            "evidential_empty": lab.evidential_empty,
            "source_doc_ids": list(lab.source_doc_ids),
        }
        if lab.text is not None:
            entry["summary"] = lab.text
        if lab.evidential_empty:
            empty += 1
        lines.append(entry)
    try:
        n = write_jsonl(output_path, lines)
    except OSError as exc:
        raise _fail(exc)
    counts = {"labeled": n, "empty_evidential": empty,
              "failed": len(failures), "failures": failures}
    _write_manifest(output_path, "label",
                    {"mode": mode, "base_url": base_url, "model": model_id,
                     "max_output_tokens": max_output_tokens, "input": str(input_path),
                     "instruction_file": str(instruction_file) if instruction_file else None},
                    [input_path], counts)
    click.echo(f"labeled {n} records ({empty} empty-evidential) -> {output_path}")


@main.command("build-train")
@click.argument("augmented_path", type=click.Path(exists=True, path_type=Path))
@click.argument("labels_path", type=click.Path(exists=True, path_type=Path))
@click.argument("output_path", type=click.Path(path_type=Path))
@click.option("--empty-policy", type=click.Choice(["skip", "sentinel"]), default="skip",
              show_default=True,
              help="Drop empty-evidential records, or emit them with the abstention sentinel.")
def build_train(augmented_path: Path, labels_path: Path, output_path: Path,
                empty_policy: str) -> None:
    """Join augmented records with their teacher labels into training examples.

    Writes one line per example: {"id", "question", "documents":
    [{"text", "label", "rank"}, ..], "summary", "teacher", "mode"}.
    """
    try:
        sets = list(load_augmented(augmented_path))
        labels_by_id: dict[str, dict[str, Any]] = {}
        for n_line, obj in iter_jsonl(labels_path):
            qid = obj.get("id")
            if not isinstance(qid, str):
                raise DatasetValidationError("label line missing id", path=labels_path,
                                             line=n_line, field="id")
            if qid in labels_by_id:
                raise DatasetValidationError(f"duplicate label for id {qid!r}",
                                             path=labels_path, line=n_line, field="id")
            labels_by_id[qid] = obj
    except (DatasetValidationError, OSError, ValueError) as exc:
        raise _fail(exc)

    examples: list[TrainExample] = []
    skipped_empty = 0
    missing = 0
    fallbacks = 0
    for aset in sets:
        if aset.decision.failure is not None:
            fallbacks += 1
        obj = labels_by_id.get(aset.query.id)
        if obj is None:
            missing += 1
            log.warning("no label for record %s; skipping", aset.query.id)
            continue
        try:
            lab = SummaryLabel(teacher_model=str(obj["teacher"]), mode=LabelMode(obj["mode"]),
                               text=obj.get("summary"),
                               source_doc_ids=list(obj.get("source_doc_ids", [])),
                               evidential_empty=bool(obj.get("evidential_empty", False)))
        except (KeyError, ValueError) as exc:
            raise _fail(DatasetValidationError(f"bad label record: {exc}", path=labels_path))
        if lab.evidential_empty and empty_policy == "skip":
            skipped_empty += 1
            continue
        if not lab.evidential_empty and lab.text is None:
            raise _fail(DatasetValidationError(
                f"label for {aset.query.id!r} has no summary", path=labels_path))
        examples.append(TrainExample(query=aset.query, documents=list(aset.documents), label=lab))
    try:
        n = write_jsonl(output_path, (train_record_dict(ex) for ex in examples))
    except OSError as exc:
        raise _fail(exc)
    counts = {"emitted": n, "skipped_empty_evidential": skipped_empty,
              "corruption_fallbacks": fallbacks, "missing_labels": missing}
    _write_manifest(output_path, "build-train",
                    {"empty_policy": empty_policy, "augmented": str(augmented_path),
                     "labels": str(labels_path), "sentinel": SENTINEL_LABEL},
                    [augmented_path, labels_path], counts)
    click.echo(f"built {n} training examples -> {output_path}")


@main.command("build-bench")
@click.argument("augmented_path", type=click.Path(exists=True, path_type=Path))
@click.argument("classified_path", type=click.Path(exists=True, path_type=Path))
@click.argument("out_dir", type=click.Path(path_type=Path))
@click.option("--seed", required=True, type=int, help="Seed for the per-stratum sampling.")
@click.option("--sample-size", default=100, show_default=True,
              help="Records drawn per evidential-count stratum.")
def build_bench(augmented_path: Path, classified_path: Path, out_dir: Path,
                seed: int, sample_size: int) -> None:
    """Construct benchmark subsets from augmented (and classified) records.

    Writes par_subset.jsonl (records keeping >= 1 evidential doc),
    noise_subset.jsonl (records with all three doc types), scenarios.jsonl
    (three cases per noise-subset record, ids suffixed #<scenario>), and
    strata.jsonl (seeded per-evidential-count samples of the pre-augmentation
    records, tagged "stratum"), each with a manifest beside it.
    """
    try:
        augmented = list(load_augmented(augmented_path))
        classified = list(load_classified(classified_path))

        par_subset, par_manifest = build_par_subset(augmented)
        noise_subset, noise_manifest = build_noise_type_subset(augmented)
        cases, scen_manifest = build_all_scenarios(noise_subset)
        strata, strata_manifest = stratify_by_evidential_count(classified, sample_size, seed)

        out_dir.mkdir(parents=True, exist_ok=True)
        n_par = write_jsonl(out_dir / "par_subset.jsonl",
                            (record_dict(a.query, a.documents, decision=a.decision)
                             for a in par_subset))
        n_noise = write_jsonl(out_dir / "noise_subset.jsonl",
                              (record_dict(a.query, a.documents, decision=a.decision)
                               for a in noise_subset))

        def scenario_line(case) -> dict[str, Any]:
            mangled = QueryRecord(id=f"{case.query.id}#{case.kind.value}",
                                  question=case.query.question, answers=case.query.answers,
                                  dataset_tag=case.query.dataset_tag)
            return record_dict(mangled, case.documents, extra={"scenario": case.kind.value})

        n_cases = write_jsonl(out_dir / "scenarios.jsonl", (scenario_line(c) for c in cases))
        n_strata = write_jsonl(
            out_dir / "strata.jsonl",
            (record_dict(r.query, r.documents, extra={"stratum": n_e})
             for n_e in sorted(strata) for r in strata[n_e]))

        for name, manifest in [("par_subset", par_manifest), ("noise_subset", noise_manifest),
                               ("scenarios", scen_manifest), ("strata", strata_manifest)]:
            write_json(out_dir / f"{name}.manifest.json", manifest.as_dict())
    except (DatasetValidationError, OSError, ValueError) as exc:
        raise _fail(exc)

    counts = {"par_subset": n_par, "noise_subset": n_noise,
              "scenario_cases": n_cases, "strata_records": n_strata,
              "par": par_manifest.stats.as_dict(), "noise": noise_manifest.stats.as_dict()}
    _write_manifest(out_dir / "run", "build-bench",
                    {"seed": seed, "sample_size": sample_size,
                     "augmented": str(augmented_path), "classified": str(classified_path)},
                    [augmented_path, classified_path], counts, seed=seed)
    click.echo(f"benchmarks: par={n_par} noise={n_noise} cases={n_cases} "
               f"strata={n_strata} -> {out_dir}")


@main.command()
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.argument("output_path", type=click.Path(path_type=Path))
@click.option("--adapter", "adapter_spec", default="echo", show_default=True,
              help="echo | truncate[:N] | empty | cmd:<command line> | http:<url>.")
@click.option("--timeout", default=60.0, show_default=True,
              help="Seconds to wait for one summary.")
def compress(input_path: Path, output_path: Path, adapter_spec: str, timeout: float) -> None:
    """Summarize each record's documents through a compressor adapter.

    INPUT_PATH: any labeled record file (classified, augmented, benchmark
    subset, or scenario cases). Writes {"id", "summary", "original_tokens",
    "compressed_tokens", "compressor"} per record; token counts use
    whitespace tokens after normalization.
    """
    from .gateway import AdapterError

    try:
        sets = list(load_classified(input_path))
    except (DatasetValidationError, OSError, ValueError) as exc:
        raise _fail(exc)
    adapter = None
    try:
        adapter = make_compressor(adapter_spec, timeout=timeout)
        lines = []
        ratios = []
        for rset in sets:
            texts = [d.doc.text for d in rset.documents]
            summary = adapter.compress(rset.query.question, texts)
            original = sum(count_tokens(t) for t in texts)
            compressed = count_tokens(summary)
            if original == 0:
                raise AdapterError(
                    f"record {rset.query.id!r}: documents hold zero tokens after normalization")
            ratios.append(compressed / original)
            lines.append({"id": rset.query.id, "summary": summary,
                          "original_tokens": original, "compressed_tokens": compressed,
                          "compressor": adapter.identity})
        n = write_jsonl(output_path, lines)
    except (AdapterError, ValueError, OSError) as exc:
        raise _fail(exc)
    finally:
        if adapter is not None:
            adapter.close()
    counts = {"records": n,
              "mean_cr": round(sum(ratios) / len(ratios), 6) if ratios else None}
    _write_manifest(output_path, "compress",
                    {"adapter": adapter_spec, "input": str(input_path)},
                    [input_path], counts)
    click.echo(f"compressed {n} records (mean CR {counts['mean_cr']}) -> {output_path}")


@main.command()
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.argument("output_path", type=click.Path(path_type=Path))
@click.option("--compressions", "compressions_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Use these summaries as context (by record id).")
@click.option("--use-docs", is_flag=True,
              help="Use the records' own documents as context instead of summaries.")
@click.option("--instruction-file", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--max-output-tokens", default=64, show_default=True)
@_client_options
def answer(input_path: Path, output_path: Path, compressions_path: Path | None,
           use_docs: bool, instruction_file: Path | None, max_output_tokens: int,
           base_url: str, model_id: str, credential_env: str,
           cache_dir: Path | None, max_in_flight: int) -> None:
    """Ask the answerer model one question per record.

    Context comes from --compressions summaries, from the documents
    themselves (--use-docs), or is omitted entirely (the model answers from
    internal knowledge). Writes {"id", "predicted", "seconds"} per record;
    seconds measure the endpoint call only.
    """
    from .prompts import default_answer_instruction, load_instruction

    if compressions_path is not None and use_docs:
        raise click.UsageError("--compressions and --use-docs are mutually exclusive")
    try:
        instruction = load_instruction(instruction_file, default_answer_instruction())
        sets = list(load_classified(input_path))
        summaries: dict[str, str] = {}
        if compressions_path is not None:
            for n_line, obj in iter_jsonl(compressions_path):
                if not isinstance(obj.get("id"), str) or not isinstance(obj.get("summary"), str):
                    raise DatasetValidationError("need string id and summary",
                                                 path=compressions_path, line=n_line)
                summaries[obj["id"]] = obj["summary"]
    except (DatasetValidationError, OSError, ValueError) as exc:
        raise _fail(exc)

    client = _make_client(base_url, model_id, credential_env, cache_dir, max_in_flight)

    def context_for(rset: RetrievalSet) -> str | None:
        if compressions_path is not None:
            if rset.query.id not in summaries:
                raise ChatError(f"no summary for record {rset.query.id!r} in {compressions_path}")
            return summaries[rset.query.id]
        if use_docs:
            return "\n".join(d.doc.text for d in rset.documents)
        return None

    def answer_one(rset: RetrievalSet) -> AnswerOutcome:
        context = context_for(rset)
        start = time.perf_counter()
        predicted = client.answer(rset.query, context=context, instruction=instruction,
                                  max_output_tokens=max_output_tokens)
        return AnswerOutcome(query_id=rset.query.id, predicted=predicted,
                             seconds=time.perf_counter() - start)

    from concurrent.futures import ThreadPoolExecutor

    try:
        with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
            outcomes = list(pool.map(answer_one, sets))
        n = write_jsonl(output_path, ({"id": o.query_id, "predicted": o.predicted,
                                       "seconds": round(o.seconds, 6)} for o in outcomes))
    except ChatError as exc:
        raise _fail(exc)
    except OSError as exc:
        raise _fail(exc)
    finally:
        client.close()
    mean_secs = round(sum(o.seconds for o in outcomes) / n, 6) if outcomes else None
    counts = {"records": n, "mean_seconds": mean_secs}
    context_mode = ("compressions" if compressions_path is not None
                    else "docs" if use_docs else "none")
    _write_manifest(output_path, "answer",
                    {"base_url": base_url, "model": model_id, "context": context_mode,
                     "max_output_tokens": max_output_tokens, "input": str(input_path),
                     "compressions": str(compressions_path) if compressions_path else None,
                     "instruction_file": str(instruction_file) if instruction_file else None},
                    [p for p in [input_path, compressions_path] if p is not None], counts)
    click.echo(f"answered {n} records -> {output_path}")


def _load_records_with_tags(path: Path) -> tuple[list[RetrievalSet], dict[str, list[str]]]:
    """Load labeled records plus group memberships from scenario/stratum tags."""
    from .dataio import _parse_labeled_record

    sets: list[RetrievalSet] = []
    groups: dict[str, list[str]] = {}
    seen: set[str] = set()
    for n_line, obj in iter_jsonl(path):
        rset = _parse_labeled_record(obj, path=path, line=n_line)
        if rset.query.id in seen:
            raise DatasetValidationError(f"duplicate record id {rset.query.id!r}",
                                         path=path, line=n_line, field="id")
        seen.add(rset.query.id)
        sets.append(rset)
        if isinstance(obj.get("scenario"), str):
            groups.setdefault(obj["scenario"], []).append(rset.query.id)
        elif "stratum" in obj:
            groups.setdefault(f"n={obj['stratum']}", []).append(rset.query.id)
    return sets, groups


@main.command()
@click.argument("records_path", type=click.Path(exists=True, path_type=Path))
@click.argument("output_path", type=click.Path(path_type=Path))
@click.option("--answers", "answers_path", required=True,
              type=click.Path(exists=True, path_type=Path),
              help="Predictions from the answer stage.")
@click.option("--compressions", "compressions_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Summaries from the compress stage (adds CR, enables PAR).")
@click.option("--par/--no-par", "include_par", default=False,
              help="Score answer preservation (records must retain an evidential doc).")
@click.option("--group-by", type=click.Choice(["auto", "none"]), default="auto",
              show_default=True, help="auto groups by scenario/stratum tags when present.")
def score(records_path: Path, output_path: Path, answers_path: Path,
          compressions_path: Path | None, include_par: bool, group_by: str) -> None:
    """Score predictions (and summaries) against the records' gold answers.

    Writes a metrics JSON: overall means plus per-group means for any
    scenario or stratum tags in the records file. EM and F1 are 0-100.
    """
    try:
        sets, groups = _load_records_with_tags(records_path)
        outcomes = []
        for n_line, obj in iter_jsonl(answers_path):
            if not isinstance(obj.get("id"), str) or not isinstance(obj.get("predicted"), str):
                raise DatasetValidationError("need string id and predicted",
                                             path=answers_path, line=n_line)
            seconds = obj.get("seconds", 0.0)
            if not isinstance(seconds, (int, float)) or seconds < 0:
                raise DatasetValidationError("seconds must be a non-negative number",
                                             path=answers_path, line=n_line, field="seconds")
            outcomes.append(AnswerOutcome(query_id=obj["id"], predicted=obj["predicted"],
                                          seconds=float(seconds)))
        outputs = None
        if compressions_path is not None:
            outputs = []
            for n_line, obj in iter_jsonl(compressions_path):
                try:
                    outputs.append(CompressionOutput(
                        query_id=obj["id"], summary=obj["summary"],
                        original_token_count=int(obj["original_tokens"]),
                        compressed_token_count=int(obj["compressed_tokens"]),
                        compressor_id=str(obj.get("compressor", ""))))
                except (KeyError, TypeError, ValueError) as exc:
                    raise DatasetValidationError(f"bad compression record: {exc}",
                                                 path=compressions_path, line=n_line)
        if include_par and outputs is None:
            raise click.UsageError("--par needs --compressions")
        report = aggregate([s.query for s in sets], outcomes=outcomes, outputs=outputs,
                           groups=groups if group_by == "auto" else None,
                           include_par=include_par)
        write_json(output_path, report.as_dict())
    except (DatasetValidationError, OSError, ValueError) as exc:
        raise _fail(exc)
    _write_manifest(output_path, "score",
                    {"records": str(records_path), "answers": str(answers_path),
                     "compressions": str(compressions_path) if compressions_path else None,
                     "par": include_par, "group_by": group_by},
                    [p for p in [records_path, answers_path, compressions_path]
                     if p is not None],
                    {"records": len(sets), "groups": len(groups)})
    click.echo(f"scored {len(sets)} records -> {output_path}")


@main.command()
@click.option("--metrics", "metrics_path", required=True,
              type=click.Path(exists=True, path_type=Path),
              help="Primary metrics JSON from the score stage.")
@click.option("--baseline", "baseline_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Clean-run metrics; adds the degradation section.")
@click.option("--scenarios", "scenarios_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Scenario metrics JSON; adds the per-scenario table.")
@click.option("--out-prefix", "out_prefix", required=True, type=click.Path(path_type=Path),
              help="Writes <prefix>.json and <prefix>.txt.")
def report(metrics_path: Path, baseline_path: Path | None,
           scenarios_path: Path | None, out_prefix: Path) -> None:
    """Combine score outputs into one machine-readable + plain-text report.

    The degradation section shows each metric as "clean -> noisy (delta)";
    the scenario table has one row per scenario group.
    """
    try:
        metrics = MetricsReport.from_dict(json.loads(metrics_path.read_text(encoding="utf-8")))
        combined: dict[str, Any] = {"metrics": metrics.as_dict()}
        sections = [render_report(metrics, title="metrics")]
        if scenarios_path is not None:
            scen = MetricsReport.from_dict(json.loads(scenarios_path.read_text(encoding="utf-8")))
            combined["scenarios"] = scen.as_dict()
            sections.append(render_report(scen, title="scenarios"))
        if baseline_path is not None:
            clean = MetricsReport.from_dict(json.loads(baseline_path.read_text(encoding="utf-8")))
            delta = degradation_delta(clean, metrics)
            combined["degradation"] = delta
            sections.append(render_delta(delta))
        json_path = out_prefix.with_name(out_prefix.name + ".json")
        txt_path = out_prefix.with_name(out_prefix.name + ".txt")
        write_json(json_path, combined)
        from .dataio import atomic_writer

        with atomic_writer(txt_path) as fh:
            fh.write("\n\n".join(sections) + "\n")
    except (KeyError, ValueError, OSError) as exc:
        raise _fail(exc)
    _write_manifest(json_path, "report",
                    {"metrics": str(metrics_path),
                     "baseline": str(baseline_path) if baseline_path else None,
                     "scenarios": str(scenarios_path) if scenarios_path else None},
                    [p for p in [metrics_path, baseline_path, scenarios_path] if p is not None],
                    {"sections": len(sections)})
    click.echo(f"report -> {json_path} and {txt_path}")


@main.command("adapter-conformance")
@click.option("--adapter", "adapter_spec", required=True,
              help="echo | truncate[:N] | empty | cmd:<command line> | http:<url>.")
@click.option("--pipeline-width", default=8, show_default=True,
              help="Concurrent requests used by the pipelining checks.")
def adapter_conformance(adapter_spec: str, pipeline_width: int) -> None:
    """Check an adapter against the wire protocol; exit 0 only if all pass."""
    from .gateway import AdapterError

    try:
        adapter = make_compressor(adapter_spec)
    except (AdapterError, ValueError, OSError) as exc:
        raise _fail(exc)
    try:
        results = run_conformance(adapter, pipeline_width=pipeline_width)
    finally:
        adapter.close()
    click.echo(render_results(results))
    if not all_passed(results):
        raise SystemExit(1)


if __name__ == "__main__":
    main()
