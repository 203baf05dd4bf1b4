"""Whitespace-token vocabulary with the four reserved ids."""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

PAD, BOS, EOS, UNK = 0, 1, 2, 3
_RESERVED = ["<pad>", "<bos>", "<eos>", "<unk>"]


def tokenize(text: str) -> list[str]:
    """Lowercased whitespace tokens; the model never sees raw casing."""
    return text.lower().split()


class Vocabulary:
    def __init__(self, words: Sequence[str]):
        for i, tok in enumerate(_RESERVED):
            if words[i] != tok:
                raise ValueError(f"word {i} must be {tok!r}, got {words[i]!r}")
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in vocabulary")
        self.words = list(words)
        self._index = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def from_texts(cls, texts: Iterable[str], max_size: int | None = None) -> "Vocabulary":
        counts = Counter(tok for text in texts for tok in tokenize(text))
        # frequency order, ties alphabetical, so builds are input-order independent
        ranked = sorted(counts, key=lambda w: (-counts[w], w))
        if max_size is not None:
            ranked = ranked[: max(0, max_size - len(_RESERVED))]
        return cls(_RESERVED + ranked)

    def encode(self, text: str) -> list[int]:
        return [self._index.get(tok, UNK) for tok in tokenize(text)]

    def decode(self, ids: Iterable[int]) -> str:
        """Text for a generated id sequence; reserved ids are dropped."""
        out = []
        for i in ids:
            if i in (PAD, BOS, EOS):
                continue
            out.append(self.words[i] if 0 <= i < len(self.words) else "<unk>")
        return " ".join(out)
