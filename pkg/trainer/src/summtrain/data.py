"""Training data: schema checks, input assembly, encoded batches."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Sequence

import torch

from .vocab import BOS, EOS, PAD, Vocabulary


class SchemaError(ValueError):
    """A train record that does not match the expected shape."""


def build_input_text(question: str, documents: Sequence[str],
                     instruction: str | None = None) -> str:
    """The model input: optional instruction, documents in given order, question."""
    parts = []
    if instruction:
        parts.append(instruction)
    parts.extend(documents)
    parts.append(question)
    return " ".join(p for p in parts if p and p.strip())


@dataclass(frozen=True)
class TrainExample:
    record_id: str
    input_text: str
    target_text: str


def _field(obj: dict, key: str, kind: type, where: str):
    value = obj.get(key)
    if not isinstance(value, kind):
        raise SchemaError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def parse_example(obj: dict, where: str, instruction: str | None = None) -> TrainExample:
    record_id = _field(obj, "id", str, where)
    question = _field(obj, "question", str, where)
    documents = _field(obj, "documents", list, where)
    summary = _field(obj, "summary", str, where)
    texts = []
    for i, doc in enumerate(documents):
        if not isinstance(doc, dict):
            raise SchemaError(f"{where}: documents[{i}] must be an object")
        texts.append(_field(doc, "text", str, f"{where}: documents[{i}]"))
    if not summary.strip():
        raise SchemaError(f"{where}: empty summary target")
    return TrainExample(record_id, build_input_text(question, texts, instruction), summary)


def load_train_file(path: str | os.PathLike[str],
                    instruction: str | None = None) -> list[TrainExample]:
    """All examples, validated up front; training never starts on bad data."""
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}, line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{where}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise SchemaError(f"{where}: not a JSON object")
            examples.append(parse_example(obj, where, instruction))
    if not examples:
        raise SchemaError(f"{path}: no training examples")
    return examples


@dataclass
class TrainBatch:
    """Aligned, padded input/target tensors for one forward pass.

    tgt_in is the BOS-shifted target for teacher forcing; tgt_out appends
    EOS and pads with PAD, which the loss ignores.
    """
    src: torch.Tensor
    src_lengths: torch.Tensor
    tgt_in: torch.Tensor
    tgt_out: torch.Tensor

    def __len__(self) -> int:
        return self.src.size(0)


def encode_batch(examples: Sequence[TrainExample], vocab: Vocabulary,
                 max_input_tokens: int = 256, max_target_tokens: int = 64) -> TrainBatch:
    if not examples:
        raise SchemaError("empty batch")
    srcs = [[BOS] + vocab.encode(e.input_text)[:max_input_tokens] for e in examples]
    tgts = [vocab.encode(e.target_text)[:max_target_tokens] for e in examples]
    for example, tgt in zip(examples, tgts):
        if not tgt:
            raise SchemaError(f"{example.record_id}: target encodes to no tokens")

    s_len = max(len(s) for s in srcs)
    t_len = max(len(t) for t in tgts) + 1  # room for BOS / EOS
    src = torch.full((len(srcs), s_len), PAD, dtype=torch.long)
    tgt_in = torch.full((len(tgts), t_len), PAD, dtype=torch.long)
    tgt_out = torch.full((len(tgts), t_len), PAD, dtype=torch.long)
    for row, s in enumerate(srcs):
        src[row, : len(s)] = torch.tensor(s, dtype=torch.long)
    for row, t in enumerate(tgts):
        tgt_in[row, 0] = BOS
        tgt_in[row, 1 : len(t) + 1] = torch.tensor(t, dtype=torch.long)
        tgt_out[row, : len(t)] = torch.tensor(t, dtype=torch.long)
        tgt_out[row, len(t)] = EOS
    lengths = torch.tensor([len(s) for s in srcs], dtype=torch.long)
    return TrainBatch(src=src, src_lengths=lengths, tgt_in=tgt_in, tgt_out=tgt_out)
