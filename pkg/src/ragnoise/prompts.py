"""Instruction templates for the summarizer and answerer prompts.

Defaults ship as editable text files under ragnoise/prompts/; any stage that
builds prompts accepts a file path override.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def _read_default(name: str) -> str:
    return resources.files("ragnoise").joinpath("prompts", name).read_text(encoding="utf-8").strip()


def default_compress_instruction() -> str:
    return _read_default("compress_instruction.txt")


def default_answer_instruction() -> str:
    return _read_default("answer_instruction.txt")


def load_instruction(path: str | Path | None, default: str) -> str:
    if path is None:
        return default
    text = Path(path).read_text(encoding="utf-8").strip()
    if not text:
        raise ValueError(f"instruction file {path} is empty")
    return text
