"""Contrastive fine-tuning of the encoder on translation pairs.

Full objective: for pair i with encodings x_i, y_i, the positive's
exponentiated cosine (over temperature tau) is normalized against the
positive itself, the pair's fixed target-side negatives scored against
x_i, and its fixed source-side negatives scored against y_i; the loss is
the mean negative log of that ratio. Negatives come from the first-stage
shared space and are never re-mined here. Batches are sequential chunks
of a seeded per-epoch shuffle.
"""

from __future__ import annotations

import logging
from typing import Callable, Sequence

import torch
import torch.nn.functional as F

from .config import C2Config
from .data import WordPair, resolve_negatives

log = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    def __init__(self, step: int):
        super().__init__(f"loss became non-finite at optimization step {step}")
        self.step = step


def infonce_scores_loss(
    pos_x: torch.Tensor,
    pos_y: torch.Tensor,
    neg_x: torch.Tensor,
    neg_y: torch.Tensor,
    tau: float,
) -> torch.Tensor:
    """Mean loss from raw encodings: (B, d) positives, (B, n, d) negatives."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    cx = F.normalize(pos_x, dim=-1)
    cy = F.normalize(pos_y, dim=-1)
    nx = F.normalize(neg_x, dim=-1)
    ny = F.normalize(neg_y, dim=-1)
    pos = (cx * cy).sum(-1) / tau
    y_logits = torch.einsum("bd,bnd->bn", cx, ny) / tau  # x_i vs its y negatives
    x_logits = torch.einsum("bnd,bd->bn", nx, cy) / tau  # x negatives vs y_i
    logits = torch.cat([pos.unsqueeze(1), y_logits, x_logits], dim=1)
    return (torch.logsumexp(logits, dim=1) - pos).mean()


Row = tuple[str, str, list[str], list[str]]


def _batch_loss(encoder, batch: Sequence[Row], tau: float) -> torch.Tensor:
    """Encode each distinct word in the batch once and assemble the loss."""
    order: dict[str, int] = {}

    def slot(word: str) -> int:
        if word not in order:
            order[word] = len(order)
        return order[word]

    px = torch.tensor([slot(r[0]) for r in batch])
    py = torch.tensor([slot(r[1]) for r in batch])
    gx = torch.tensor([[slot(w) for w in r[2]] for r in batch])
    gy = torch.tensor([[slot(w) for w in r[3]] for r in batch])
    encoded = encoder.encode(list(order))
    return infonce_scores_loss(
        encoded[px], encoded[py], encoded[gx], encoded[gy], tau
    )


def dataset_loss(encoder, rows: Sequence[Row], tau: float, batch_size: int = 256) -> float:
    """Mean loss over all rows without gradients, in eval mode."""
    was_training = encoder.model.training
    encoder.model.eval()
    total = 0.0
    with torch.no_grad():
        for start in range(0, len(rows), batch_size):
            chunk = rows[start : start + batch_size]
            total += float(_batch_loss(encoder, chunk, tau)) * len(chunk)
    if was_training:
        encoder.model.train()
    return total / len(rows)


def finetune(
    encoder,
    pairs: Sequence[WordPair],
    negatives,
    config: C2Config,
    on_step: Callable[[int, float], None] | None = None,
) -> list[float]:
    """Optimize the encoder in place; returns the per-step loss trace.

    negatives: the per-pair table from load_negatives_tsv, or a list of
    (src_negs, tgt_negs) aligned with pairs. Zero epochs is a no-op.
    """
    if len(pairs) == 0:
        raise ValueError("no training pairs")
    if isinstance(negatives, dict):
        aligned = resolve_negatives(pairs, negatives)
    else:
        aligned = list(negatives)
        if len(aligned) != len(pairs):
            raise ValueError("negatives list does not line up with pairs")
    for i, (src_negs, tgt_negs) in enumerate(aligned):
        if len(src_negs) < config.n_neg or len(tgt_negs) < config.n_neg:
            raise ValueError(f"pair {pairs[i]} has fewer than {config.n_neg} negatives")
    rows: list[Row] = [
        (s, t, list(negs[0][: config.n_neg]), list(negs[1][: config.n_neg]))
        for (s, t), negs in zip(pairs, aligned)
    ]
    if config.epochs == 0:
        return []

    torch.manual_seed(config.rng_seed)
    shuffler = torch.Generator().manual_seed(config.rng_seed)
    optimizer = torch.optim.AdamW(
        encoder.model.parameters(), lr=config.lr, weight_decay=config.weight_decay
    )
    device_type = encoder.device.type
    encoder.model.train()
    losses: list[float] = []
    step = 0
    for epoch in range(config.epochs):
        perm = torch.randperm(len(rows), generator=shuffler).tolist()
        for start in range(0, len(perm), config.batch_size):
            batch = [rows[i] for i in perm[start : start + config.batch_size]]
            with torch.autocast(device_type, enabled=config.mixed_precision):
                loss = _batch_loss(encoder, batch, config.tau)
            if not torch.isfinite(loss):
                raise TrainingDivergedError(step)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            losses.append(float(loss.detach()))
            if on_step is not None:
                on_step(step, losses[-1])
            step += 1
        log.debug("epoch %d done, last loss %.6f", epoch + 1, losses[-1])
    encoder.model.eval()
    return losses
