"""Tiny seq2seq summarizer: distillation training and a protocol server."""

__version__ = "0.1.0"
