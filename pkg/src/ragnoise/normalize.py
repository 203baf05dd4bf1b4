"""Answer-string normalization and normalization-aware span location.

All answer matching in the pipeline (classification, EM/F1, PAR, corruption
checks) goes through `normalize_text`, so every consumer agrees on what
"contains the answer" means.
"""

from __future__ import annotations

import unicodedata
from typing import Sequence

_ARTICLES = frozenset({"a", "an", "the"})


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def normalize_text(s: str) -> str:
    """Lowercase, strip Unicode punctuation, drop article tokens, collapse whitespace."""
    stripped = "".join(ch for ch in s.lower() if not _is_punct(ch))
    return " ".join(t for t in stripped.split() if t not in _ARTICLES)


def norm_tokens(s: str) -> list[str]:
    """Whitespace tokens of the normalized text (the default metric tokenizer)."""
    return normalize_text(s).split()


def contains_answer(text: str, aliases: Sequence[str]) -> bool:
    """True iff the normalized text contains some normalized alias as a substring.

    Aliases whose normalization is empty are ignored; an empty alias list is
    a caller error.
    """
    if not aliases:
        raise ValueError("alias list must be non-empty")
    norm = normalize_text(text)
    if not norm:
        return False
    for alias in aliases:
        a = normalize_text(alias)
        if a and a in norm:
            return True
    return False


def _normalized_with_origins(s: str) -> tuple[str, list[int | None]]:
    """Normalize `s` while tracking, per normalized character, the index of the
    original character it came from (None for the synthetic inter-token spaces).

    Lowercasing is applied per character here, so context-sensitive case
    mappings can differ from `normalize_text`; callers must re-verify matches
    with `contains_answer` rather than trust the mapping blindly.
    """
    produced: list[tuple[str, int]] = []
    for i, ch in enumerate(s):
        for c in ch.lower():
            if not _is_punct(c):
                produced.append((c, i))

    tokens: list[list[tuple[str, int]]] = []
    current: list[tuple[str, int]] = []
    for c, i in produced:
        if c.isspace():
            if current:
                tokens.append(current)
                current = []
        else:
            current.append((c, i))
    if current:
        tokens.append(current)

    chars: list[str] = []
    origins: list[int | None] = []
    first = True
    for tok in tokens:
        if "".join(c for c, _ in tok) in _ARTICLES:
            continue
        if not first:
            chars.append(" ")
            origins.append(None)
        first = False
        for c, i in tok:
            chars.append(c)
            origins.append(i)
    return "".join(chars), origins


def find_answer_span(text: str, aliases: Sequence[str]) -> tuple[int, int, str] | None:
    """Locate the surface span of the longest alias occurring in `text`.

    Matching is normalization-aware: an alias "occurs" wherever its normalized
    form appears in the normalized text, and the returned (start, end) bounds
    the original characters that produced that match. Ties on normalized alias
    length break by earliest occurrence, then by alias list order. Returns
    None when no alias occurs.
    """
    norm, origins = _normalized_with_origins(text)
    if not norm:
        return None

    best: tuple[int, int, int, int] | None = None  # (-len, pos, alias_idx, end)
    for idx, alias in enumerate(aliases):
        a = normalize_text(alias)
        if not a:
            continue
        pos = norm.find(a)
        if pos < 0:
            continue
        key = (-len(a), pos, idx)
        if best is None or key < best[:3]:
            best = (*key, pos + len(a))
    if best is None:
        return None

    _, pos, alias_idx, end = best
    spanned = [o for o in origins[pos:end] if o is not None]
    if not spanned:
        return None
    start_orig = min(spanned)
    end_orig = max(spanned) + 1
    return start_orig, end_orig, aliases[alias_idx]
