"""Contrastive refinement of the dual linear maps.

The maps are trained with a temperature-scaled softmax loss over cosine
similarities: each dictionary pair is the positive, and mined hard
negatives from both languages fill the denominator. The gradient is
computed in closed form (no autograd) so the whole step stays in blocked
numpy and results are reproducible bit-for-bit across worker counts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import BilingualDictionary, VocabEmbedding
from .mapping import LinearMapPair
from .parallel import cross_gram, matmul_rows, ordered_sum, run_blocks
from .retrieval import _as_matrix, nn_topk

log = logging.getLogger(__name__)

PAIR_BLOCK = 512


class TrainingDivergedError(RuntimeError):
    """The loss became non-finite during fine-tuning."""

    def __init__(self, epoch: int, message: str):
        super().__init__(message)
        self.epoch = epoch


@dataclass
class TrainConfig:
    """Fine-tuning hyperparameters. The batch is always the whole dictionary."""

    n_cl: int = 200
    n_neg: int = 150
    lr: float = 1.5
    gamma: float = 0.99
    tau: float = 1.0
    refresh_interval: int = 1

    def __post_init__(self) -> None:
        if self.n_cl < 0:
            raise ValueError("n_cl must be non-negative")
        if self.n_neg < 0:
            raise ValueError("n_neg must be non-negative")
        if not self.lr > 0:
            raise ValueError("lr must be positive")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.refresh_interval < 1:
            raise ValueError("refresh_interval must be at least 1")


@dataclass(eq=False)
class NegativePool:
    """Mined negative indices, one row per dictionary pair.

    neg_x[i] indexes source-vocabulary words competing against pair i's
    source word; neg_y[i] indexes target-vocabulary competitors.
    """

    neg_x: np.ndarray
    neg_y: np.ndarray

    def __post_init__(self) -> None:
        self.neg_x = np.asarray(self.neg_x, dtype=np.int64)
        self.neg_y = np.asarray(self.neg_y, dtype=np.int64)
        if self.neg_x.ndim != 2 or self.neg_y.ndim != 2:
            raise ValueError("negative pools must be 2-D (pairs x negatives)")
        if self.neg_x.shape[0] != self.neg_y.shape[0]:
            raise ValueError("negative pools disagree on the pair count")


def _drop_counterpart(idx: np.ndarray, true_idx: np.ndarray) -> np.ndarray:
    """Drop each row's true counterpart from its top-(k+1) list, else the last.

    Keeping the nearest k+1 and removing one entry per row yields exactly the
    k nearest non-counterpart indices in order.
    """
    keep = idx != true_idx[:, None]
    keep[keep.all(axis=1), -1] = False
    return idx[keep].reshape(idx.shape[0], idx.shape[1] - 1)


def mine_hard_negatives(
    dictionary: BilingualDictionary,
    x_mapped: VocabEmbedding | np.ndarray,
    y_mapped: VocabEmbedding | np.ndarray,
    n_neg: int,
    threads: int | None = None,
) -> NegativePool:
    """Nearest competitors of each pair under cosine in the mapped spaces.

    For pair (m, n): neg_x[i] holds the n_neg source rows closest to the
    mapped target vector of n, excluding m itself; neg_y[i] symmetrically
    holds target rows closest to the mapped source vector of m, excluding n.
    Ties break toward the lower index.
    """
    x = _as_matrix(x_mapped, "x_mapped")
    y = _as_matrix(y_mapped, "y_mapped")
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"mapped dimensions differ: {x.shape[1]} vs {y.shape[1]}")
    dictionary.check_bounds(x.shape[0], y.shape[0])
    if n_neg < 0:
        raise ValueError("n_neg must be non-negative")
    n_pairs = len(dictionary)
    if n_neg == 0:
        empty = np.empty((n_pairs, 0), dtype=np.int64)
        return NegativePool(empty, empty.copy())
    if n_neg >= x.shape[0] or n_neg >= y.shape[0]:
        raise ValueError(
            f"n_neg={n_neg} needs more candidates than the vocabulary offers "
            f"({x.shape[0]} source, {y.shape[0]} target)"
        )
    src, tgt = dictionary.src, dictionary.tgt
    near_x = nn_topk(y[tgt], x, n_neg + 1, measure="cosine", threads=threads)
    near_y = nn_topk(x[src], y, n_neg + 1, measure="cosine", threads=threads)
    return NegativePool(_drop_counterpart(near_x, src), _drop_counterpart(near_y, tgt))


def _check_loss_inputs(
    dictionary: BilingualDictionary,
    pool: NegativePool,
    x: np.ndarray,
    y: np.ndarray,
    w_x: np.ndarray,
    w_y: np.ndarray,
    tau: float,
) -> None:
    if len(pool.neg_x) != len(dictionary):
        raise ValueError(
            f"pool covers {len(pool.neg_x)} pairs but dictionary has {len(dictionary)}"
        )
    if not tau > 0:
        raise ValueError("tau must be positive")
    if len(dictionary) == 0:
        raise ValueError("cannot evaluate the loss on an empty dictionary")
    dictionary.check_bounds(x.shape[0], y.shape[0])
    if pool.neg_x.size and (pool.neg_x.min() < 0 or pool.neg_x.max() >= x.shape[0]):
        raise ValueError("neg_x contains out-of-range indices")
    if pool.neg_y.size and (pool.neg_y.min() < 0 or pool.neg_y.max() >= y.shape[0]):
        raise ValueError("neg_y contains out-of-range indices")
    if w_x.shape != (x.shape[1], x.shape[1]) or w_y.shape != (y.shape[1], y.shape[1]):
        raise ValueError("map shapes do not match embedding dimensions")


def _mapped_unit(
    emb: np.ndarray, w: np.ndarray, used: np.ndarray, threads: int | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mapped rows for the used (unique, sorted) indices: raw, norms, unit."""
    mapped = matmul_rows(emb[used], w, threads)
    norms = np.linalg.norm(mapped, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(
            f"mapped row for vocabulary index {int(used[zero[0]])} has zero norm"
        )
    return mapped, norms, mapped / norms[:, None]


def _loss_and_grad(
    dictionary: BilingualDictionary,
    pool: NegativePool,
    x: np.ndarray,
    y: np.ndarray,
    w_x: np.ndarray,
    w_y: np.ndarray,
    tau: float,
    want_grad: bool,
    threads: int | None = None,
) -> tuple[float, np.ndarray | None, np.ndarray | None]:
    """Mean softmax loss over pairs, optionally with d loss / d w_x, d w_y.

    Writing u_i = x_i w_x, v_j = y_j w_y and c_t = (softmax weight of combo t
    minus 1 if t is the positive) / (tau * n_pairs), each combo (a, b)
    contributes c_t * outer(x_a, (v_b/|v_b| - cos * u_a/|u_a|) / |u_a|) to the
    w_x gradient and the mirrored term to w_y. The terms are regrouped into a
    handful of matrix products; per-pair blocks are reduced in fixed order.
    """
    _check_loss_inputs(dictionary, pool, x, y, w_x, w_y, tau)
    src, tgt = dictionary.src, dictionary.tgt
    neg_x, neg_y = pool.neg_x, pool.neg_y
    n_pairs = len(dictionary)
    n_x, n_y = neg_x.shape[1], neg_y.shape[1]

    used_x = np.unique(np.concatenate([src, neg_x.ravel()])) if n_x else np.unique(src)
    used_y = np.unique(np.concatenate([tgt, neg_y.ravel()])) if n_y else np.unique(tgt)
    _, norm_u, u_hat = _mapped_unit(x, w_x, used_x, threads)
    _, norm_v, v_hat = _mapped_unit(y, w_y, used_y, threads)
    isrc = np.searchsorted(used_x, src)
    itgt = np.searchsorted(used_y, tgt)
    inx = np.searchsorted(used_x, neg_x)
    iny = np.searchsorted(used_y, neg_y)

    dim = x.shape[1]
    if want_grad:
        r_x = np.empty((n_pairs, dim))
        q_x = np.empty((n_pairs, dim))
        r_y = np.empty((n_pairs, dim))
        q_y = np.empty((n_pairs, dim))

    def work(start: int, stop: int):
        us = u_hat[isrc[start:stop]]
        vt = v_hat[itgt[start:stop]]
        cos_pos = np.einsum("bd,bd->b", us, vt)
        v_neg = v_hat[iny[start:stop]]
        u_neg = u_hat[inx[start:stop]]
        cos_yn = np.einsum("bd,bnd->bn", us, v_neg)
        cos_xn = np.einsum("bnd,bd->bn", u_neg, vt)
        logits = np.concatenate([cos_pos[:, None], cos_yn, cos_xn], axis=1) / tau
        peak = logits.max(axis=1)
        expo = np.exp(logits - peak[:, None])
        denom = expo.sum(axis=1)
        loss_sum = float(np.sum(np.log(denom) + peak - logits[:, 0]))
        if not want_grad:
            return loss_sum, None, None
        coef = expo / denom[:, None]
        coef[:, 0] -= 1.0
        coef /= tau * n_pairs
        c_pos = coef[:, 0]
        c_yn = coef[:, 1 : 1 + n_y]
        c_xn = coef[:, 1 + n_y :]

        inv_nu = 1.0 / norm_u[isrc[start:stop]]
        inv_nv = 1.0 / norm_v[itgt[start:stop]]
        # Combos sharing the pair's source word: positive and y-negatives.
        rx = c_pos[:, None] * vt + np.einsum("bn,bnd->bd", c_yn, v_neg)
        self_x = c_pos * cos_pos + np.einsum("bn,bn->b", c_yn, cos_yn)
        r_x[start:stop] = (rx - self_x[:, None] * us) * inv_nu[:, None]
        # Combos sharing the pair's target word: positive and x-negatives.
        ry = c_pos[:, None] * us + np.einsum("bn,bnd->bd", c_xn, u_neg)
        self_y = c_pos * cos_pos + np.einsum("bn,bn->b", c_xn, cos_xn)
        r_y[start:stop] = (ry - self_y[:, None] * vt) * inv_nv[:, None]
        # x-negative combos: raw negative rows weighted toward the pair's
        # target unit vector, plus per-index self terms handled after the loop.
        alpha_x = c_xn / norm_u[inx[start:stop]]
        q_x[start:stop] = np.einsum("bn,bnd->bd", alpha_x, x[neg_x[start:stop]])
        w_x_local = np.zeros(len(used_x))
        np.add.at(w_x_local, inx[start:stop].ravel(), (alpha_x * cos_xn).ravel())
        alpha_y = c_yn / norm_v[iny[start:stop]]
        q_y[start:stop] = np.einsum("bn,bnd->bd", alpha_y, y[neg_y[start:stop]])
        w_y_local = np.zeros(len(used_y))
        np.add.at(w_y_local, iny[start:stop].ravel(), (alpha_y * cos_yn).ravel())
        return loss_sum, w_x_local, w_y_local

    parts = run_blocks(work, n_pairs, PAIR_BLOCK, threads)
    loss = sum(p[0] for p in parts) / n_pairs
    if not want_grad:
        return loss, None, None
    weight_x = ordered_sum([p[1] for p in parts], (len(used_x),))
    weight_y = ordered_sum([p[2] for p in parts], (len(used_y),))
    grad_x = cross_gram(x[src], r_x, threads)
    grad_x += cross_gram(q_x, v_hat[itgt], threads)
    grad_x -= cross_gram(x[used_x] * weight_x[:, None], u_hat, threads)
    grad_y = cross_gram(y[tgt], r_y, threads)
    grad_y += cross_gram(q_y, u_hat[isrc], threads)
    grad_y -= cross_gram(y[used_y] * weight_y[:, None], v_hat, threads)
    return loss, grad_x, grad_y


def infonce_loss(
    dictionary: BilingualDictionary,
    pool: NegativePool,
    x: VocabEmbedding | np.ndarray,
    y: VocabEmbedding | np.ndarray,
    w_x: np.ndarray,
    w_y: np.ndarray,
    tau: float = 1.0,
    threads: int | None = None,
) -> float:
    """Mean contrastive loss of the dictionary pairs under the given maps."""
    loss, _, _ = _loss_and_grad(
        dictionary,
        pool,
        _as_matrix(x, "x"),
        _as_matrix(y, "y"),
        np.asarray(w_x, dtype=np.float64),
        np.asarray(w_y, dtype=np.float64),
        tau,
        want_grad=False,
        threads=threads,
    )
    return loss


def infonce_grad(
    dictionary: BilingualDictionary,
    pool: NegativePool,
    x: VocabEmbedding | np.ndarray,
    y: VocabEmbedding | np.ndarray,
    w_x: np.ndarray,
    w_y: np.ndarray,
    tau: float = 1.0,
    threads: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of infonce_loss with respect to (w_x, w_y)."""
    _, grad_x, grad_y = _loss_and_grad(
        dictionary,
        pool,
        _as_matrix(x, "x"),
        _as_matrix(y, "y"),
        np.asarray(w_x, dtype=np.float64),
        np.asarray(w_y, dtype=np.float64),
        tau,
        want_grad=True,
        threads=threads,
    )
    assert grad_x is not None and grad_y is not None
    return grad_x, grad_y


def contrastive_finetune(
    dictionary: BilingualDictionary,
    x: VocabEmbedding,
    y: VocabEmbedding,
    maps: LinearMapPair,
    config: TrainConfig,
    threads: int | None = None,
    on_epoch: Callable[[int, float, float], None] | None = None,
) -> LinearMapPair:
    """Full-batch gradient descent on the contrastive loss.

    One epoch is one step over the whole dictionary. Negatives are re-mined
    against the current maps every refresh_interval epochs (always at epoch
    0). The step size decays by gamma after each epoch. A non-finite loss
    aborts with the offending epoch.
    """
    x_m = _as_matrix(x, "x")
    y_m = _as_matrix(y, "y")
    if maps.dim != x_m.shape[1] or maps.dim != y_m.shape[1]:
        raise ValueError(f"map dim {maps.dim} does not match embeddings")
    if config.n_cl == 0:
        return maps.copy()
    if len(dictionary) == 0:
        raise ValueError("cannot fine-tune on an empty dictionary")
    dictionary.check_bounds(x_m.shape[0], y_m.shape[0])
    w_x = maps.w_x.copy()
    w_y = maps.w_y.copy()
    lr = config.lr
    pool: NegativePool | None = None
    for epoch in range(config.n_cl):
        if epoch % config.refresh_interval == 0:
            pool = mine_hard_negatives(
                dictionary,
                matmul_rows(x_m, w_x, threads),
                matmul_rows(y_m, w_y, threads),
                config.n_neg,
                threads=threads,
            )
        assert pool is not None
        loss, grad_x, grad_y = _loss_and_grad(
            dictionary, pool, x_m, y_m, w_x, w_y, config.tau, want_grad=True, threads=threads
        )
        if not np.isfinite(loss):
            raise TrainingDivergedError(
                epoch,
                f"loss became non-finite at epoch {epoch}; lower lr or raise tau",
            )
        w_x -= lr * grad_x
        w_y -= lr * grad_y
        lr *= config.gamma
        log.debug("epoch=%d loss=%.6f lr=%.6f", epoch, loss, lr)
        if on_epoch is not None:
            on_epoch(epoch, loss, lr)
    return LinearMapPair(w_x, w_y)
