"""Answer and compression metrics plus report assembly.

Scores are computed over normalized text (lowercase, punctuation and
articles removed): exact match, token-level F1 (max over aliases),
compression ratio, answer-preservation ratio, and mean inference seconds.
Reports group per scenario kind or per evidential-count stratum and can be
diffed into a degradation-delta view.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .models import AnswerOutcome, CompressionOutput, QueryRecord
from .normalize import contains_answer, norm_tokens, normalize_text

Tokenizer = Callable[[str], list[str]]

METRIC_FIELDS = ("em", "f1", "cr", "par", "inference_time")


def count_tokens(text: str, tokenizer: Tokenizer = norm_tokens) -> int:
    return len(tokenizer(text))


def exact_match(pred: str, aliases: Sequence[str]) -> int:
    """1 iff the normalized prediction equals some normalized alias."""
    if not aliases:
        raise ValueError("aliases must be non-empty")
    pred_norm = normalize_text(pred)
    return int(any(pred_norm == normalize_text(a) for a in aliases))


def _f1_single(pred_tokens: list[str], gold_tokens: list[str]) -> float:
    if not pred_tokens and not gold_tokens:
        return 1.0
    overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def token_f1(pred: str, aliases: Sequence[str], tokenizer: Tokenizer = norm_tokens) -> float:
    """Best token-multiset F1 between the prediction and any alias."""
    if not aliases:
        raise ValueError("aliases must be non-empty")
    pred_tokens = tokenizer(pred)
    return max(_f1_single(pred_tokens, tokenizer(a)) for a in aliases)


def compression_ratio(out: CompressionOutput) -> float:
    if out.original_token_count <= 0:
        raise ValueError(f"record {out.query_id!r}: original token count must be positive")
    return out.compressed_token_count / out.original_token_count


def par(outputs: Iterable[CompressionOutput],
        records: Mapping[str, QueryRecord]) -> float:
    """Fraction of summaries that still contain some answer alias.

    `records` must cover exactly the eligible queries (each retaining at
    least one evidential document); an output for an unknown query is an
    input error.
    """
    outs = list(outputs)
    if not outs:
        raise ValueError("par requires at least one compression output")
    hits = 0
    for out in outs:
        rec = records.get(out.query_id)
        if rec is None:
            raise ValueError(f"output for query {out.query_id!r} is outside the eligible subset")
        hits += int(contains_answer(out.summary, rec.answers))
    return hits / len(outs)


@dataclass(frozen=True)
class GroupMetrics:
    n: int
    em: float | None = None
    f1: float | None = None
    cr: float | None = None
    par: float | None = None
    inference_time: float | None = None

    def as_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"n": self.n}
        for name in METRIC_FIELDS:
            value = getattr(self, name)
            if value is not None:
                d[name] = value
        return d

    def metric_names(self) -> list[str]:
        return [name for name in METRIC_FIELDS if getattr(self, name) is not None]

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GroupMetrics":
        return cls(n=int(d["n"]), **{name: d.get(name) for name in METRIC_FIELDS})


@dataclass(frozen=True)
class MetricsReport:
    overall: GroupMetrics
    groups: dict[str, GroupMetrics] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"overall": self.overall.as_dict()}
        if self.groups:
            d["groups"] = {name: g.as_dict() for name, g in self.groups.items()}
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "MetricsReport":
        return cls(overall=GroupMetrics.from_dict(d["overall"]),
                   groups={name: GroupMetrics.from_dict(g)
                           for name, g in d.get("groups", {}).items()})


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _group_metrics(ids: list[str],
                   em_by_id: dict[str, int], f1_by_id: dict[str, float],
                   cr_by_id: dict[str, float], par_by_id: dict[str, int],
                   secs_by_id: dict[str, float]) -> GroupMetrics:
    if not ids:
        return GroupMetrics(n=0)

    def collect(table: dict[str, Any]) -> list[Any]:
        return [table[i] for i in ids if i in table]

    ems = collect(em_by_id)
    f1s = collect(f1_by_id)
    crs = collect(cr_by_id)
    pars = collect(par_by_id)
    secs = collect(secs_by_id)
    return GroupMetrics(
        n=len(ids),
        em=round(100 * _mean(ems), 4) if ems else None,
        f1=round(100 * _mean(f1s), 4) if f1s else None,
        cr=round(_mean(crs), 6) if crs else None,
        par=round(_mean(pars), 6) if pars else None,
        inference_time=round(_mean(secs), 6) if secs else None,
    )


def aggregate(records: Iterable[QueryRecord],
              outcomes: Iterable[AnswerOutcome] | None = None,
              outputs: Iterable[CompressionOutput] | None = None,
              groups: Mapping[str, Sequence[str]] | None = None,
              include_par: bool = False) -> MetricsReport:
    """Score outcomes/outputs against their query records and average.

    EM and F1 are reported x100. PAR is included only when requested, since
    it is meaningful only on subsets whose records retain an evidential
    document. Groups map a name to the query ids it covers; empty groups
    stay in the report as zero-count markers.
    """
    by_id: dict[str, QueryRecord] = {}
    for rec in records:
        if rec.id in by_id:
            raise ValueError(f"duplicate query id {rec.id!r}")
        by_id[rec.id] = rec

    def check_known(qid: str, what: str) -> None:
        if qid not in by_id:
            raise ValueError(f"{what} for unknown query {qid!r}")

    em_by_id: dict[str, int] = {}
    f1_by_id: dict[str, float] = {}
    secs_by_id: dict[str, float] = {}
    for out in outcomes or ():
        check_known(out.query_id, "answer outcome")
        if out.query_id in em_by_id:
            raise ValueError(f"duplicate answer outcome for query {out.query_id!r}")
        aliases = by_id[out.query_id].answers
        em_by_id[out.query_id] = exact_match(out.predicted, aliases)
        f1_by_id[out.query_id] = token_f1(out.predicted, aliases)
        secs_by_id[out.query_id] = out.seconds

    cr_by_id: dict[str, float] = {}
    par_by_id: dict[str, int] = {}
    for out in outputs or ():
        check_known(out.query_id, "compression output")
        if out.query_id in cr_by_id:
            raise ValueError(f"duplicate compression output for query {out.query_id!r}")
        cr_by_id[out.query_id] = compression_ratio(out)
        if include_par:
            par_by_id[out.query_id] = int(contains_answer(out.summary, by_id[out.query_id].answers))

    all_ids = list(by_id)
    overall = _group_metrics(all_ids, em_by_id, f1_by_id, cr_by_id, par_by_id, secs_by_id)
    group_reports: dict[str, GroupMetrics] = {}
    for name, ids in (groups or {}).items():
        ids = list(ids)
        for qid in ids:
            check_known(qid, f"group {name!r} member")
        group_reports[name] = _group_metrics(ids, em_by_id, f1_by_id, cr_by_id,
                                             par_by_id, secs_by_id)
    return MetricsReport(overall=overall, groups=group_reports)


def format_delta(clean: float, noisy: float) -> str:
    return f"{clean:.2f} → {noisy:.2f} ({noisy - clean:+.2f})"


def _delta_entry(clean: float, noisy: float) -> dict[str, Any]:
    return {"clean": clean, "noisy": noisy, "delta": round(noisy - clean, 6),
            "display": format_delta(clean, noisy)}


def _delta_group(clean: GroupMetrics, noisy: GroupMetrics, where: str) -> dict[str, Any]:
    if clean.metric_names() != noisy.metric_names():
        raise ValueError(
            f"{where}: metric sets differ ({clean.metric_names()} vs {noisy.metric_names()})")
    return {name: _delta_entry(getattr(clean, name), getattr(noisy, name))
            for name in clean.metric_names()}


def degradation_delta(clean: MetricsReport, noisy: MetricsReport) -> dict[str, Any]:
    """Per-metric clean-vs-noisy comparison, each entry carrying the values
    and an "a -> b (+/-d)" display string."""
    if set(clean.groups) != set(noisy.groups):
        raise ValueError(f"group sets differ ({sorted(clean.groups)} vs {sorted(noisy.groups)})")
    delta: dict[str, Any] = {"overall": _delta_group(clean.overall, noisy.overall, "overall")}
    if clean.groups:
        delta["groups"] = {name: _delta_group(clean.groups[name], noisy.groups[name], name)
                           for name in clean.groups}
    return delta


# --- plain-text rendering --------------------------------------------------


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def render_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(r[i].ljust(widths[i]) for i in range(len(headers))) for r in rows]
    return "\n".join(line.rstrip() for line in lines)


def render_report(report: MetricsReport, title: str = "metrics") -> str:
    """Aligned plain-text view: one row per group, one column per metric."""
    metric_names = report.overall.metric_names()
    headers = ["group", "n"] + metric_names
    rows = [["overall", str(report.overall.n)]
            + [_fmt(getattr(report.overall, m)) for m in metric_names]]
    for name, g in report.groups.items():
        row = [name, str(g.n)]
        for m in metric_names:
            value = getattr(g, m)
            row.append(_fmt(value) if value is not None else "-")
        rows.append(row)
    return f"== {title} ==\n{render_table(headers, rows)}"


def render_delta(delta: dict[str, Any], title: str = "noise degradation") -> str:
    headers = ["group", "metric", "clean → noisy (Δ)"]
    rows = [["overall", metric, entry["display"]]
            for metric, entry in delta["overall"].items()]
    for gname, metrics in delta.get("groups", {}).items():
        rows += [[gname, metric, entry["display"]] for metric, entry in metrics.items()]
    return f"== {title} ==\n{render_table(headers, rows)}"
