"""Writing the tuned encoder's word vectors to the binary container."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from .bliv import write_bliv

log = logging.getLogger(__name__)


def encode_vocabulary(encoder, vocab: Sequence[str], batch_size: int = 256) -> np.ndarray:
    """Float32 matrix of word vectors, one row per vocab word, in order."""
    if len(vocab) == 0:
        raise ValueError("empty vocabulary")
    seen: dict[str, int] = {}
    for i, word in enumerate(vocab):
        if word in seen:
            raise ValueError(f"duplicate word {word!r} at positions {seen[word]} and {i}")
        seen[word] = i
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    encoder.model.eval()
    blocks = []
    with torch.no_grad():
        for start in range(0, len(vocab), batch_size):
            chunk = list(vocab[start : start + batch_size])
            blocks.append(encoder.encode(chunk).cpu().numpy())
    return np.ascontiguousarray(np.vstack(blocks), dtype=np.float32)


def export_word_embeddings(
    encoder, vocab: Sequence[str], out_path: str | Path, batch_size: int = 256
) -> np.ndarray:
    matrix = encode_vocabulary(encoder, vocab, batch_size)
    write_bliv(list(vocab), matrix, out_path)
    log.info("wrote %d x %d word vectors to %s", matrix.shape[0], matrix.shape[1], out_path)
    return matrix
