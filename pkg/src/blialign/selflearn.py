"""Self-learning: alternate map fitting with dictionary augmentation.

Each iteration refits the closed-form maps on the current dictionary,
fine-tunes them contrastively, then harvests new translation pairs from the
mapped spaces among the most frequent words. Harvested pairs extend the seed
dictionary for the next iteration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .contrastive import TrainConfig, contrastive_finetune
from .data import BilingualDictionary, PairOrigin, VocabEmbedding
from .mapping import LinearMapPair, advanced_mapping
from .parallel import matmul_rows
from .retrieval import _as_matrix, _blocked_topk, _unit_rows, compute_csls_stats

log = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-6


@dataclass
class C1Config:
    """Self-learning schedule around a fine-tuning config."""

    n_iter: int = 2
    n_freq: int = 60000
    n_aug: int = 10000
    supervised: bool = True
    csls_k: int = 10
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self) -> None:
        if self.n_iter < 1:
            raise ValueError("n_iter must be at least 1")
        if self.n_freq < 1:
            raise ValueError("n_freq must be at least 1")
        if self.n_aug < 0:
            raise ValueError("n_aug must be non-negative")
        if self.csls_k < 1:
            raise ValueError("csls_k must be at least 1")


def preset(mode: str) -> C1Config:
    """Built-in schedules for large ("5k") and small ("1k") seed dictionaries."""
    if mode == "5k":
        return C1Config(
            n_iter=2,
            n_freq=60000,
            n_aug=10000,
            supervised=True,
            train=TrainConfig(n_cl=200, n_neg=150, lr=1.5, gamma=0.99, tau=1.0),
        )
    if mode == "1k":
        return C1Config(
            n_iter=3,
            n_freq=20000,
            n_aug=6000,
            supervised=False,
            train=TrainConfig(n_cl=50, n_neg=60, lr=2.0, gamma=1.0, tau=1.0),
        )
    raise ValueError(f"unknown preset {mode!r}, expected '5k' or '1k'")


@dataclass(eq=False)
class IterationRecord:
    """Snapshot handed to the run_c1 inspection hook after each iteration."""

    iteration: int
    maps: LinearMapPair
    d_cl: BilingualDictionary
    d_add: BilingualDictionary
    d_next: BilingualDictionary
    losses: list[float]


def _candidate_scan(
    xs: np.ndarray,
    ys: np.ndarray,
    k: int,
    threads: int | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Best mutual-neighbour candidate per word in both directions.

    Returns (forward pairs, forward scores, backward pairs, backward scores),
    each direction ranked by descending hubness-corrected score with ties
    toward the lower source index, then the lower target index. Scores use
    the full correction on both sides so they are comparable across queries.
    """
    r_tgt = compute_csls_stats(xs, ys, k, threads).r_values  # per target word
    r_src = compute_csls_stats(ys, xs, k, threads).r_values  # per source word

    fwd_vals, fwd_idx = _blocked_topk(xs, ys, 1, scale=2.0, bias=-r_tgt, threads=threads)
    fwd_scores = fwd_vals[:, 0] - r_src
    fwd_pairs = np.stack([np.arange(len(xs)), fwd_idx[:, 0]], axis=1)
    order = np.lexsort((fwd_pairs[:, 1], fwd_pairs[:, 0], -fwd_scores))
    fwd_pairs, fwd_scores = fwd_pairs[order], fwd_scores[order]

    bwd_vals, bwd_idx = _blocked_topk(ys, xs, 1, scale=2.0, bias=-r_src, threads=threads)
    bwd_scores = bwd_vals[:, 0] - r_tgt
    bwd_pairs = np.stack([bwd_idx[:, 0], np.arange(len(ys))], axis=1)
    order = np.lexsort((bwd_pairs[:, 1], bwd_pairs[:, 0], -bwd_scores))
    bwd_pairs, bwd_scores = bwd_pairs[order], bwd_scores[order]
    return fwd_pairs, fwd_scores, bwd_pairs, bwd_scores


def _conflicts_with_seed(
    pair: tuple[int, int],
    seed_pairs: set[tuple[int, int]],
    seed_by_src: dict[int, set[int]],
    seed_by_tgt: dict[int, set[int]],
) -> bool:
    """A candidate is dropped if it repeats or contradicts a seed pair."""
    s, t = pair
    if pair in seed_pairs:
        return True
    if s in seed_by_src and t not in seed_by_src[s]:
        return True
    if t in seed_by_tgt and s not in seed_by_tgt[t]:
        return True
    return False


def _seed_lookup(
    d0: BilingualDictionary,
) -> tuple[set[tuple[int, int]], dict[int, set[int]], dict[int, set[int]]]:
    seed_pairs = d0.as_set()
    by_src: dict[int, set[int]] = {}
    by_tgt: dict[int, set[int]] = {}
    for s, t in seed_pairs:
        by_src.setdefault(s, set()).add(t)
        by_tgt.setdefault(t, set()).add(s)
    return seed_pairs, by_src, by_tgt


def _clamped_sizes(
    n_freq: int, n_aug: int, n_src: int, n_tgt: int
) -> tuple[int, int]:
    capped = min(n_freq, n_src, n_tgt)
    if capped < n_freq:
        log.warning("n_freq=%d exceeds a vocabulary, clamping to %d", n_freq, capped)
    if n_aug > capped:
        log.warning("n_aug=%d exceeds n_freq=%d, clamping", n_aug, capped)
        n_aug = capped
    return capped, n_aug


def augment_dictionary(
    d0: BilingualDictionary,
    x_mapped: VocabEmbedding | np.ndarray,
    y_mapped: VocabEmbedding | np.ndarray,
    n_freq: int,
    n_aug: int,
    k: int = 10,
    threads: int | None = None,
) -> BilingualDictionary:
    """Harvest up to n_aug pairs per direction from the mapped spaces.

    Candidates live among the n_freq most frequent words of each side. Each
    direction keeps its n_aug best-scoring pairs; the union is deduplicated
    (forward origin wins) and pairs repeating or contradicting d0 are removed
    afterwards, so fewer than 2 * n_aug pairs may survive.
    """
    x = _as_matrix(x_mapped, "x_mapped")
    y = _as_matrix(y_mapped, "y_mapped")
    if n_aug == 0:
        return BilingualDictionary.from_pairs([])
    n_freq, n_aug = _clamped_sizes(n_freq, n_aug, x.shape[0], y.shape[0])
    xs = _unit_rows(x[:n_freq], "x_mapped")
    ys = _unit_rows(y[:n_freq], "y_mapped")
    fwd_pairs, _, bwd_pairs, _ = _candidate_scan(xs, ys, k, threads)

    seed_pairs, by_src, by_tgt = _seed_lookup(d0)
    chosen: list[tuple[int, int]] = []
    origins: list[PairOrigin] = []
    seen: set[tuple[int, int]] = set()
    for pairs, origin in (
        (fwd_pairs[:n_aug], PairOrigin.FORWARD_AUGMENTED),
        (bwd_pairs[:n_aug], PairOrigin.BACKWARD_AUGMENTED),
    ):
        for s, t in pairs:
            pair = (int(s), int(t))
            if pair in seen:
                continue
            seen.add(pair)
            if _conflicts_with_seed(pair, seed_pairs, by_src, by_tgt):
                continue
            chosen.append(pair)
            origins.append(origin)
    return BilingualDictionary.from_pairs(chosen, origins)


def export_candidates(
    x_mapped: VocabEmbedding | np.ndarray,
    y_mapped: VocabEmbedding | np.ndarray,
    d0: BilingualDictionary,
    n_freq: int,
    top_n: int,
    k: int = 10,
    threads: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Globally ranked translation candidates for downstream training.

    Same induction as augment_dictionary, but both directions compete in one
    ranking by full hubness-corrected score (ties toward lower source index,
    then lower target index) and the top_n best survive. Pairs repeating or
    contradicting d0 are excluded. Returns (pairs, scores).
    """
    x = _as_matrix(x_mapped, "x_mapped")
    y = _as_matrix(y_mapped, "y_mapped")
    if top_n < 0:
        raise ValueError("top_n must be non-negative")
    n_freq, _ = _clamped_sizes(n_freq, 0, x.shape[0], y.shape[0])
    xs = _unit_rows(x[:n_freq], "x_mapped")
    ys = _unit_rows(y[:n_freq], "y_mapped")
    fwd_pairs, fwd_scores, bwd_pairs, bwd_scores = _candidate_scan(xs, ys, k, threads)

    pairs = np.concatenate([fwd_pairs, bwd_pairs])
    scores = np.concatenate([fwd_scores, bwd_scores])
    seed_pairs, by_src, by_tgt = _seed_lookup(d0)
    keep: list[int] = []
    seen: set[tuple[int, int]] = set()
    order = np.lexsort((pairs[:, 1], pairs[:, 0], -scores))
    for i in order:
        pair = (int(pairs[i, 0]), int(pairs[i, 1]))
        if pair in seen:
            continue
        seen.add(pair)
        if _conflicts_with_seed(pair, seed_pairs, by_src, by_tgt):
            continue
        keep.append(i)
        if len(keep) >= top_n:
            break
    return pairs[keep], scores[keep]


def run_c1(
    x: VocabEmbedding,
    y: VocabEmbedding,
    d0: BilingualDictionary,
    config: C1Config,
    threads: int | None = None,
    inspect: Callable[[IterationRecord], None] | None = None,
) -> tuple[LinearMapPair, BilingualDictionary]:
    """The full first-stage pipeline: fit, fine-tune, augment, repeat.

    x and y must be l2-normalized. With supervised=True fine-tuning always
    uses the seed dictionary; otherwise it uses the current augmented one.
    Returns the final maps and the final training dictionary.
    """
    for name, emb in (("x", x), ("y", y)):
        norms = np.linalg.norm(emb.matrix, axis=1)
        if np.abs(norms - 1.0).max(initial=0.0) > NORMALIZATION_TOL:
            raise ValueError(f"{name} embeddings must be l2-normalized first")
    d0.check_bounds(len(x), len(y))
    if len(d0) < 2:
        raise ValueError("need at least 2 seed pairs")

    current = d0
    maps: LinearMapPair | None = None
    for iteration in range(1, config.n_iter + 1):
        maps = advanced_mapping(
            x.matrix[current.src], y.matrix[current.tgt], threads=threads
        )
        d_cl = d0 if config.supervised else current
        losses: list[float] = []
        maps = contrastive_finetune(
            d_cl,
            x,
            y,
            maps,
            config.train,
            threads=threads,
            on_epoch=lambda epoch, loss, lr: losses.append(loss),
        )
        if config.n_aug > 0:
            d_add = augment_dictionary(
                d0,
                matmul_rows(x.matrix, maps.w_x, threads),
                matmul_rows(y.matrix, maps.w_y, threads),
                config.n_freq,
                config.n_aug,
                config.csls_k,
                threads=threads,
            )
        else:
            d_add = BilingualDictionary.from_pairs([])
        d_next = d0.union(d_add)
        log.info(
            "iteration=%d dict=%d train_pairs=%d added=%d final_loss=%s",
            iteration,
            len(current),
            len(d_cl),
            len(d_add),
            f"{losses[-1]:.6f}" if losses else "n/a",
        )
        if inspect is not None:
            inspect(IterationRecord(iteration, maps, d_cl, d_add, d_next, losses))
        current = d_next
    assert maps is not None
    return maps, current
