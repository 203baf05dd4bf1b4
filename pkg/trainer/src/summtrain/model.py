"""Encoder-decoder summarizer, its training loss, and greedy decoding."""

from __future__ import annotations

import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence

from .vocab import BOS, EOS, PAD


class Seq2SeqSummarizer(nn.Module):
    """Single-layer GRU encoder-decoder with a shared embedding table.

    Deliberately small: acceptance runs train it on a CPU in seconds. Size
    scales through embed_dim/hidden_dim, nothing else changes.
    """

    def __init__(self, vocab_size: int, embed_dim: int = 32, hidden_dim: int = 64):
        super().__init__()
        self.vocab_size = vocab_size
        self.embed = nn.Embedding(vocab_size, embed_dim, padding_idx=PAD)
        self.encoder = nn.GRU(embed_dim, hidden_dim, batch_first=True)
        self.decoder = nn.GRU(embed_dim, hidden_dim, batch_first=True)
        self.project = nn.Linear(hidden_dim, vocab_size)

    def encode(self, src: torch.Tensor, src_lengths: torch.Tensor) -> torch.Tensor:
        packed = pack_padded_sequence(self.embed(src), src_lengths.cpu(),
                                      batch_first=True, enforce_sorted=False)
        _, hidden = self.encoder(packed)
        return hidden

    def forward(self, src: torch.Tensor, src_lengths: torch.Tensor,
                tgt_in: torch.Tensor) -> torch.Tensor:
        """Teacher-forced logits over the vocabulary, shape (B, T, V)."""
        hidden = self.encode(src, src_lengths)
        out, _ = self.decoder(self.embed(tgt_in), hidden)
        return self.project(out)


def sequence_nll(logits: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Negative log-likelihood of the target tokens, summed over the batch.

    Padded positions carry no loss. Non-negative always; zero exactly when
    every target token gets probability 1.
    """
    return nn.functional.cross_entropy(
        logits.reshape(-1, logits.size(-1)), targets.reshape(-1),
        ignore_index=PAD, reduction="sum")


@torch.no_grad()
def greedy_decode(model: Seq2SeqSummarizer, src_ids: list[int],
                  max_new_tokens: int = 32) -> list[int]:
    """Argmax decoding until EOS or the length cap; fully deterministic."""
    if not src_ids:
        src_ids = [BOS]
    model.eval()
    src = torch.tensor([src_ids], dtype=torch.long)
    hidden = model.encode(src, torch.tensor([len(src_ids)]))
    token = torch.tensor([[BOS]], dtype=torch.long)
    out: list[int] = []
    for _ in range(max_new_tokens):
        step, hidden = model.decoder(model.embed(token), hidden)
        next_id = int(model.project(step[:, -1]).argmax(dim=-1))
        if next_id == EOS:
            break
        out.append(next_id)
        token = torch.tensor([[next_id]], dtype=torch.long)
    return out
