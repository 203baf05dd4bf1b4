"""Command line: train a checkpoint, serve it over the wire protocol."""

from __future__ import annotations

import logging
from pathlib import Path

import click

from . import __version__
from .data import SchemaError, load_train_file
from .serve import serve_socket, serve_stdio
from .training import (
    DEFAULT_INSTRUCTION,
    CheckpointError,
    TrainConfig,
    TrainingDiverged,
    load_checkpoint,
    train,
)


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose: bool):
    """Train a small summarization compressor and serve it to the pipeline."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command(name="train")
@click.argument("train_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option("--steps", default=200, show_default=True)
@click.option("--batch-size", default=2, show_default=True)
@click.option("--grad-accum", default=2, show_default=True,
              help="Microbatches accumulated per optimizer step.")
@click.option("--lr", default=5e-3, show_default=True,
              help="Adam learning rate (a local default; no published value exists).")
@click.option("--seed", default=0, show_default=True)
@click.option("--eval-every", default=1000, show_default=True,
              help="Steps between full-set evaluations and interim checkpoints.")
@click.option("--embed-dim", default=32, show_default=True)
@click.option("--hidden-dim", default=64, show_default=True)
@click.option("--max-input-tokens", default=256, show_default=True)
@click.option("--max-target-tokens", default=64, show_default=True)
@click.option("--max-vocab", default=None, type=int,
              help="Cap vocabulary size; unset keeps every training token.")
@click.option("--include-instruction/--no-include-instruction", default=False,
              show_default=True,
              help="Prepend the instruction to every input. Only sensible "
                   "when the base model is instruction-tuned.")
@click.option("--instruction-file", type=click.Path(exists=True, dir_okay=False),
              help="Override the built-in instruction text.")
def train_cmd(train_file, out_dir, steps, batch_size, grad_accum, lr, seed,
              eval_every, embed_dim, hidden_dim, max_input_tokens,
              max_target_tokens, max_vocab, include_instruction, instruction_file):
    """Fit the summarizer to TRAIN_FILE (one example per line: {"id",
    "question", "documents": [{"text", ..}, ..], "summary", ..}).

    Writes checkpoints and loss.log under OUT_DIR; the final model is
    OUT_DIR/ckpt-final.pt.
    """
    instruction = DEFAULT_INSTRUCTION
    if instruction_file:
        instruction = Path(instruction_file).read_text(encoding="utf-8").strip()
        if not instruction:
            raise click.ClickException(f"{instruction_file} is empty")
    config = TrainConfig(steps=steps, batch_size=batch_size, grad_accum=grad_accum,
                         lr=lr, seed=seed, eval_every=eval_every,
                         embed_dim=embed_dim, hidden_dim=hidden_dim,
                         max_input_tokens=max_input_tokens,
                         max_target_tokens=max_target_tokens, max_vocab=max_vocab,
                         include_instruction=include_instruction,
                         instruction=instruction)
    try:
        examples = load_train_file(
            train_file, config.instruction if config.include_instruction else None)
        checkpoint = train(examples, out_dir, config)
    except SchemaError as exc:
        raise click.ClickException(str(exc)) from exc
    except TrainingDiverged as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"trained {steps} steps on {len(examples)} examples -> {checkpoint}")


@main.command()
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False))
@click.option("--socket", "socket_path", type=click.Path(),
              help="Serve on this unix socket instead of stdio.")
@click.option("--max-new-tokens", default=32, show_default=True)
def serve(checkpoint, socket_path, max_new_tokens):
    """Answer compression requests for CHECKPOINT until EOF.

    Reads {"id", "query", "documents"} lines, writes {"id", "summary"}
    lines, sequentially and in arrival order.
    """
    try:
        model, vocab, config = load_checkpoint(checkpoint)
    except CheckpointError as exc:
        raise click.ClickException(str(exc)) from exc
    if socket_path:
        serve_socket(socket_path, model, vocab, config, max_new_tokens)
    else:
        serve_stdio(model, vocab, config, max_new_tokens)
