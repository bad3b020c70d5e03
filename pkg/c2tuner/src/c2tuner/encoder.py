"""Turning single words into encoder vectors.

A word is tokenized to "[CLS] subword... [SEP]" and encoded; its vector is
the final-layer [CLS] state. Sequences are capped at max_seq_len tokens
including the two specials, dropping trailing subwords. A word whose
tokenization comes back empty is encoded as the unknown token instead,
with a warning.
"""

from __future__ import annotations

import logging
from typing import Sequence

import torch

log = logging.getLogger(__name__)


class WordEncoder:
    def __init__(self, model, tokenizer, max_seq_len: int = 6, device: str | None = None):
        if max_seq_len < 3:
            raise ValueError("max_seq_len must be >= 3")
        self.model = model
        self.tokenizer = tokenizer
        self.max_seq_len = max_seq_len
        self.device = torch.device(device) if device else torch.device("cpu")
        self.model.to(self.device)
        for name in ("cls_token_id", "sep_token_id", "pad_token_id", "unk_token_id"):
            if getattr(tokenizer, name, None) is None:
                raise ValueError(f"tokenizer lacks {name}")

    @classmethod
    def load(cls, model_name: str, max_seq_len: int = 6, device: str | None = None):
        from transformers import AutoModel, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(model_name)
        model = AutoModel.from_pretrained(model_name)
        return cls(model, tokenizer, max_seq_len, device)

    @property
    def dim(self) -> int:
        return int(self.model.config.hidden_size)

    def _inner_ids(self, word: str) -> list[int]:
        ids = self.tokenizer.encode(word, add_special_tokens=False)
        if not ids:
            log.warning("word %r tokenized to nothing; using the unknown token", word)
            ids = [self.tokenizer.unk_token_id]
        return ids[: self.max_seq_len - 2]

    def encode(self, words: Sequence[str]) -> torch.Tensor:
        """Batch of [CLS] vectors, one row per word, in input order.

        Runs under the caller's grad mode and the model's current
        train/eval mode.
        """
        if len(words) == 0:
            raise ValueError("no words to encode")
        tok = self.tokenizer
        sequences = [
            [tok.cls_token_id] + self._inner_ids(w) + [tok.sep_token_id] for w in words
        ]
        width = max(len(s) for s in sequences)
        ids = torch.full((len(sequences), width), tok.pad_token_id, dtype=torch.long)
        mask = torch.zeros((len(sequences), width), dtype=torch.long)
        for i, seq in enumerate(sequences):
            ids[i, : len(seq)] = torch.tensor(seq, dtype=torch.long)
            mask[i, : len(seq)] = 1
        ids = ids.to(self.device)
        mask = mask.to(self.device)
        out = self.model(input_ids=ids, attention_mask=mask)
        return out.last_hidden_state[:, 0]

    def save(self, out_dir: str) -> None:
        self.model.save_pretrained(out_dir)
        self.tokenizer.save_pretrained(out_dir)
