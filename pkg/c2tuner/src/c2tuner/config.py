"""Hyperparameters for the encoder fine-tuning stage."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_MODEL = "bert-base-multilingual-uncased"


@dataclass
class C2Config:
    """Training and export settings.

    Defaults target the 12-layer, 768-dim multilingual encoder and the
    standard word-translation fine-tuning regime: AdamW, five epochs,
    batches of 100 pairs, temperature 0.1, 28 fixed negatives per side,
    and word sequences capped at 6 tokens including [CLS] and [SEP].
    """

    model_name: str = DEFAULT_MODEL
    epochs: int = 5
    batch_size: int = 100
    lr: float = 2e-5
    weight_decay: float = 0.01
    tau: float = 0.1
    n_neg: int = 28
    max_seq_len: int = 6
    rng_seed: int = 33
    mixed_precision: bool = False  # off by default: bitwise reproducibility

    def __post_init__(self) -> None:
        if not self.model_name:
            raise ValueError("model_name must be non-empty")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.n_neg < 1:
            raise ValueError("n_neg must be >= 1")
        if self.max_seq_len < 3:
            raise ValueError("max_seq_len must be >= 3 ([CLS], one subword, [SEP])")
