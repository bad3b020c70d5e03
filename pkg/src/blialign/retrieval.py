"""Nearest-neighbour retrieval over embedding spaces.

All scoring is blocked: query blocks run in parallel, target blocks are
scanned sequentially per query block and merged in order, so results are
exact and independent of the worker count. Ties are broken toward the lower
target index everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import VocabEmbedding
from .parallel import iter_blocks, run_blocks

QUERY_BLOCK = 1024
TARGET_BLOCK = 8192

_MEASURES = ("cosine", "dot")


@dataclass(eq=False)
class CslsStats:
    """Per-target-word mean similarity to its k nearest source neighbours."""

    r_values: np.ndarray
    k: int

    def __post_init__(self) -> None:
        self.r_values = np.asarray(self.r_values, dtype=np.float64)
        if self.r_values.ndim != 1:
            raise ValueError("r_values must be 1-D")
        if self.k < 1:
            raise ValueError("k must be at least 1")


def _as_matrix(x: VocabEmbedding | np.ndarray, name: str) -> np.ndarray:
    m = x.matrix if isinstance(x, VocabEmbedding) else np.asarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite values")
    return m


def _unit_rows(m: np.ndarray, name: str) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(f"{name} row {int(zero[0])} has zero norm, cosine undefined")
    return m / norms[:, None]


def _take_rows(values: np.ndarray, order: np.ndarray) -> np.ndarray:
    return np.take_along_axis(values, order, axis=1)


def _row_topk(scores: np.ndarray, k: int, offset: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-row top-k of a score block under the order (-score, index).

    Returns (values, global indices), both (rows, k). k must not exceed the
    block width; callers cap it.
    """
    n_rows, width = scores.shape
    if k > width:
        raise ValueError(f"k={k} exceeds block width {width}")
    if k == width:
        cand = np.broadcast_to(np.arange(width), scores.shape)
        vals = scores
    else:
        cand = np.argpartition(-scores, k - 1, axis=1)[:, :k]
        vals = _take_rows(scores, cand)
        # Threshold ties straddling the partition boundary need a re-pick
        # from all candidates at or above the row's k-th value.
        thr = vals.min(axis=1)
        suspect = np.flatnonzero((scores >= thr[:, None]).sum(axis=1) > k)
        for r in suspect:
            full = np.flatnonzero(scores[r] >= thr[r])
            order = np.lexsort((full, -scores[r, full]))[:k]
            cand[r] = full[order]
            vals[r] = scores[r, cand[r]]
    # Sort candidates by index first, then stably by descending score, so
    # equal scores come out lowest-index-first.
    by_index = np.argsort(cand, axis=1, kind="stable")
    cand = _take_rows(cand, by_index)
    vals = _take_rows(vals, by_index)
    by_score = np.argsort(-vals, axis=1, kind="stable")
    return _take_rows(vals, by_score), _take_rows(cand, by_score) + offset


def _merge_topk(
    best_vals: np.ndarray,
    best_idx: np.ndarray,
    new_vals: np.ndarray,
    new_idx: np.ndarray,
    k: int,
) -> tuple[np.ndarray, np.ndarray]:
    vals = np.concatenate([best_vals, new_vals], axis=1)
    idx = np.concatenate([best_idx, new_idx], axis=1)
    by_index = np.argsort(idx, axis=1, kind="stable")
    idx = _take_rows(idx, by_index)
    vals = _take_rows(vals, by_index)
    by_score = np.argsort(-vals, axis=1, kind="stable")
    keep = min(k, vals.shape[1])
    return _take_rows(vals, by_score)[:, :keep], _take_rows(idx, by_score)[:, :keep]


def _blocked_topk(
    queries: np.ndarray,
    targets: np.ndarray,
    k: int,
    scale: float = 1.0,
    bias: np.ndarray | None = None,
    threads: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Top-k of scale * (queries @ targets.T) + bias[target], row by row."""
    n_q, n_t = queries.shape[0], targets.shape[0]
    out_vals = np.empty((n_q, k), dtype=np.float64)
    out_idx = np.empty((n_q, k), dtype=np.int64)

    def work(q_start: int, q_stop: int) -> None:
        q = queries[q_start:q_stop]
        best_vals = best_idx = None
        for t_start, t_stop in iter_blocks(n_t, TARGET_BLOCK):
            block = q @ targets[t_start:t_stop].T
            if scale != 1.0:
                block *= scale
            if bias is not None:
                block += bias[t_start:t_stop]
            vals, idx = _row_topk(block, min(k, t_stop - t_start), t_start)
            if best_vals is None:
                best_vals, best_idx = vals, idx
            else:
                best_vals, best_idx = _merge_topk(best_vals, best_idx, vals, idx, k)
        out_vals[q_start:q_stop] = best_vals
        out_idx[q_start:q_stop] = best_idx

    run_blocks(work, n_q, QUERY_BLOCK, threads)
    return out_vals, out_idx


def nn_topk(
    queries: VocabEmbedding | np.ndarray,
    targets: VocabEmbedding | np.ndarray,
    k: int,
    measure: str = "cosine",
    return_scores: bool = False,
    threads: int | None = None,
):
    """Indices of the k best target rows per query row, best first.

    measure is "cosine" or "dot". With return_scores, also returns the
    matching score matrix.
    """
    q = _as_matrix(queries, "queries")
    t = _as_matrix(targets, "targets")
    if q.shape[1] != t.shape[1]:
        raise ValueError(f"dimension mismatch: queries {q.shape[1]}, targets {t.shape[1]}")
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > t.shape[0]:
        raise ValueError(f"k={k} exceeds target vocabulary of {t.shape[0]}")
    if measure not in _MEASURES:
        raise ValueError(f"unknown measure {measure!r}, expected one of {_MEASURES}")
    if measure == "cosine":
        q = _unit_rows(q, "queries")
        t = _unit_rows(t, "targets")
    vals, idx = _blocked_topk(q, t, k, threads=threads)
    return (idx, vals) if return_scores else idx


def compute_csls_stats(
    source_space: VocabEmbedding | np.ndarray,
    target_space: VocabEmbedding | np.ndarray,
    k: int = 10,
    threads: int | None = None,
) -> CslsStats:
    """Mean cosine of each target word to its k nearest source rows.

    These are the per-target hubness corrections subtracted during retrieval.
    """
    src = _as_matrix(source_space, "source_space")
    tgt = _as_matrix(target_space, "target_space")
    if src.shape[1] != tgt.shape[1]:
        raise ValueError(f"dimension mismatch: {src.shape[1]} vs {tgt.shape[1]}")
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= src.shape[0]:
        raise ValueError(f"k={k} must be smaller than the source vocabulary ({src.shape[0]})")
    vals, _ = _blocked_topk(_unit_rows(tgt, "target_space"), _unit_rows(src, "source_space"), k, threads=threads)
    return CslsStats(vals.mean(axis=1), k)


def csls_topk(
    queries: VocabEmbedding | np.ndarray,
    targets: VocabEmbedding | np.ndarray,
    stats: CslsStats,
    k: int,
    return_scores: bool = False,
    threads: int | None = None,
):
    """Top-k targets per query under 2*cosine minus the target correction.

    The query-side correction is constant per query and cannot change its
    ranking, so it is not subtracted here.
    """
    q = _as_matrix(queries, "queries")
    t = _as_matrix(targets, "targets")
    if q.shape[1] != t.shape[1]:
        raise ValueError(f"dimension mismatch: queries {q.shape[1]}, targets {t.shape[1]}")
    if len(stats.r_values) != t.shape[0]:
        raise ValueError(
            f"stats cover {len(stats.r_values)} targets but got {t.shape[0]} target rows"
        )
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > t.shape[0]:
        raise ValueError(f"k={k} exceeds target vocabulary of {t.shape[0]}")
    vals, idx = _blocked_topk(
        _unit_rows(q, "queries"),
        _unit_rows(t, "targets"),
        k,
        scale=2.0,
        bias=-stats.r_values,
        threads=threads,
    )
    return (idx, vals) if return_scores else idx
