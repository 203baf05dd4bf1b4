"""Training loop: distill teacher summaries into the small summarizer."""

from __future__ import annotations

import dataclasses
import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import torch

from . import __version__
from .data import TrainExample, encode_batch
from .model import Seq2SeqSummarizer, sequence_nll
from .vocab import Vocabulary

log = logging.getLogger("summtrain.training")

DEFAULT_INSTRUCTION = ("Summarize the documents so the question can be "
                       "answered from the summary alone.")


@dataclass
class TrainConfig:
    """Hyperparameters and input assembly settings.

    batch_size 2 with grad_accum 2 and a periodic evaluation cadence follow
    the published setup this distillation reproduces. The optimizer and
    learning rate are unspecified by paper; adam/5e-3 are local defaults and
    asserted as nothing more. Decoding is greedy by design, not a tunable.

    include_instruction prepends the instruction text to every model input;
    leave it off unless the base model being trained is instruction-tuned.
    """
    steps: int = 200
    batch_size: int = 2
    grad_accum: int = 2
    lr: float = 5e-3                # unspecified by paper
    optimizer: str = "adam"         # unspecified by paper
    seed: int = 0
    eval_every: int = 1000
    embed_dim: int = 32
    hidden_dim: int = 64
    max_input_tokens: int = 256
    max_target_tokens: int = 64
    max_vocab: int | None = None
    include_instruction: bool = False
    instruction: str = DEFAULT_INSTRUCTION

    def __post_init__(self):
        if self.steps < 1 or self.batch_size < 1 or self.grad_accum < 1:
            raise ValueError("steps, batch_size and grad_accum must be >= 1")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")
        if self.optimizer != "adam":
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


class TrainingDiverged(RuntimeError):
    """Loss stopped being finite; carries the step it happened at."""

    def __init__(self, step: int, value: float):
        super().__init__(f"non-finite loss {value!r} at step {step}")
        self.step = step
        self.value = value


def ensure_finite(value: float, step: int) -> float:
    if not math.isfinite(value):
        raise TrainingDiverged(step, value)
    return value


def evaluate(model: Seq2SeqSummarizer, examples: Sequence[TrainExample],
             vocab: Vocabulary, config: TrainConfig) -> float:
    """Mean per-example loss over the whole set, teacher-forced."""
    model.eval()
    total = 0.0
    with torch.no_grad():
        for i in range(0, len(examples), config.batch_size):
            batch = encode_batch(examples[i:i + config.batch_size], vocab,
                                 config.max_input_tokens, config.max_target_tokens)
            total += float(sequence_nll(model(batch.src, batch.src_lengths, batch.tgt_in),
                                        batch.tgt_out))
    return total / len(examples)


def save_checkpoint(path: Path, model: Seq2SeqSummarizer, vocab: Vocabulary,
                    config: TrainConfig) -> None:
    torch.save({"model_state": model.state_dict(), "words": list(vocab.words),
                "config": dataclasses.asdict(config), "tool_version": __version__}, path)


class CheckpointError(RuntimeError):
    pass


def load_checkpoint(path) -> tuple[Seq2SeqSummarizer, Vocabulary, TrainConfig]:
    # torch.load's failure modes vary by format and version; anything short
    # of a usable model is the same condition to callers
    try:
        saved = torch.load(path, map_location="cpu")
        vocab = Vocabulary(saved["words"])
        known = {f.name for f in dataclasses.fields(TrainConfig)}
        config = TrainConfig(**{k: v for k, v in saved["config"].items() if k in known})
        model = Seq2SeqSummarizer(len(vocab), config.embed_dim, config.hidden_dim)
        model.load_state_dict(saved["model_state"])
    except Exception as exc:
        raise CheckpointError(f"cannot load checkpoint {path}: {exc}") from exc
    model.eval()
    return model, vocab, config


def train(examples: Sequence[TrainExample], out_dir: Path,
          config: TrainConfig) -> Path:
    """Run the loop; returns the final checkpoint path.

    Writes loss.log in out_dir: one "step N loss X" line per optimizer step
    (mean per-example loss of that step's microbatches) plus "eval step N
    mean_loss X" lines over the full set, the first at step 0 before any
    update. Checkpoints land at each evaluation and at the end.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(config.seed)
    rng = random.Random(config.seed)

    vocab = Vocabulary.from_texts(
        [e.input_text for e in examples] + [e.target_text for e in examples],
        config.max_vocab)
    model = Seq2SeqSummarizer(len(vocab), config.embed_dim, config.hidden_dim)
    opt = torch.optim.Adam(model.parameters(), lr=config.lr)

    def microbatches():
        while True:
            order = rng.sample(range(len(examples)), len(examples))
            for i in range(0, len(order), config.batch_size):
                yield [examples[j] for j in order[i:i + config.batch_size]]

    stream = microbatches()
    final_path = out_dir / "ckpt-final.pt"
    with open(out_dir / "loss.log", "w", encoding="utf-8") as logfile:
        initial = ensure_finite(evaluate(model, examples, vocab, config), 0)
        logfile.write(f"eval step 0 mean_loss {initial:.6f}\n")
        for step in range(1, config.steps + 1):
            model.train()
            opt.zero_grad()
            step_loss, seen = 0.0, 0
            for _ in range(config.grad_accum):
                group = next(stream)
                batch = encode_batch(group, vocab, config.max_input_tokens,
                                     config.max_target_tokens)
                loss = sequence_nll(model(batch.src, batch.src_lengths, batch.tgt_in),
                                    batch.tgt_out)
                step_loss += float(loss.detach())
                seen += len(group)
                # normalize so lr does not depend on the accumulation split
                (loss / (config.batch_size * config.grad_accum)).backward()
            ensure_finite(step_loss, step)
            opt.step()
            logfile.write(f"step {step} loss {step_loss / seen:.6f}\n")
            if step % config.eval_every == 0 and step < config.steps:
                mean = ensure_finite(evaluate(model, examples, vocab, config), step)
                logfile.write(f"eval step {step} mean_loss {mean:.6f}\n")
                save_checkpoint(out_dir / f"ckpt-step{step}.pt", model, vocab, config)
                log.info("step %d: mean loss %.4f", step, mean)
        final = ensure_finite(evaluate(model, examples, vocab, config), config.steps)
        logfile.write(f"eval step {config.steps} mean_loss {final:.6f}\n")
    save_checkpoint(final_path, model, vocab, config)
    log.info("finished %d steps; final mean loss %.4f", config.steps, final)
    return final_path
