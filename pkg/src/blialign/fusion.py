"""Fusing two cross-lingual spaces of different dimensionality.

A rectangular orthogonal map carries the first space into the second, where
the two views of each word are linearly interpolated. The map solves
min ||x w - y||_F over matrices with orthonormal rows, which preserves
cosine similarities exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import VocabEmbedding
from .parallel import cross_gram, matmul_rows
from .retrieval import _as_matrix, _unit_rows

DEFAULT_LAMBDA = 0.2


@dataclass(eq=False)
class FusionMap:
    """Orthogonal projection w (d1 x d2, d1 <= d2) and interpolation weight."""

    w: np.ndarray
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self) -> None:
        self.w = np.ascontiguousarray(np.asarray(self.w, dtype=np.float64))
        if self.w.ndim != 2:
            raise ValueError(f"fusion map must be 2-D, got shape {self.w.shape}")
        if self.w.shape[0] > self.w.shape[1]:
            raise ValueError(
                f"fusion map must not reduce dimension: got {self.w.shape[0]}x{self.w.shape[1]}"
            )
        if not 0 <= self.lam <= 1:
            raise ValueError("interpolation weight must be in [0, 1]")


def generalized_procrustes(
    x: np.ndarray,
    y: np.ndarray,
    lam: float = DEFAULT_LAMBDA,
    threads: int | None = None,
) -> FusionMap:
    """Least-squares orthogonal map from paired rows x (n x d1) to y (n x d2).

    Requires d1 <= d2. The solution is u @ vt restricted to the top d1 right
    singular vectors of x.T y; rows of w are orthonormal.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("inputs must be 2-D matrices")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"row counts differ: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 1:
        raise ValueError("need at least one row pair")
    if x.shape[1] > y.shape[1]:
        raise ValueError(
            f"source dimension {x.shape[1]} exceeds target dimension {y.shape[1]}; "
            "the orthogonality constraint is infeasible"
        )
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("inputs contain non-finite values")
    u, _, vt = np.linalg.svd(cross_gram(x, y, threads), full_matrices=True)
    return FusionMap(u @ vt[: x.shape[1]], lam)


def interpolate(v_c1: np.ndarray, v_c2: np.ndarray, fmap: FusionMap) -> np.ndarray:
    """Blend one word's two views: (1-lam) * unit(v_c1 @ w) + lam * unit(v_c2).

    The result is intentionally not re-normalized.
    """
    v_c1 = np.asarray(v_c1, dtype=np.float64)
    v_c2 = np.asarray(v_c2, dtype=np.float64)
    if v_c1.shape != (fmap.w.shape[0],) or v_c2.shape != (fmap.w.shape[1],):
        raise ValueError(
            f"expected vectors of dim {fmap.w.shape[0]} and {fmap.w.shape[1]}, "
            f"got {v_c1.shape} and {v_c2.shape}"
        )
    projected = v_c1 @ fmap.w
    for name, vec in (("projected first-space", projected), ("second-space", v_c2)):
        if np.linalg.norm(vec) == 0.0:
            raise ValueError(f"cannot normalize zero {name} vector")
    blend = (1.0 - fmap.lam) * projected / np.linalg.norm(projected)
    blend += fmap.lam * v_c2 / np.linalg.norm(v_c2)
    return blend


def _interpolate_rows(c1: np.ndarray, c2: np.ndarray, fmap: FusionMap, name: str,
                      threads: int | None) -> np.ndarray:
    projected = matmul_rows(c1, fmap.w, threads)
    return (1.0 - fmap.lam) * _unit_rows(projected, f"projected {name}") + fmap.lam * _unit_rows(
        c2, name
    )


def fuse_spaces(
    c1_src: VocabEmbedding,
    c1_tgt: VocabEmbedding,
    c2_src: VocabEmbedding,
    c2_tgt: VocabEmbedding,
    seed,
    lam: float = DEFAULT_LAMBDA,
    threads: int | None = None,
) -> tuple[VocabEmbedding, VocabEmbedding]:
    """Fuse per-language first-stage and second-stage spaces.

    The projection is fitted on the seed dictionary's words from both
    languages at once: each seed word contributes its (first-space, second-
    space) row pair, l2-normalized on both sides. Every vocabulary row is
    then blended in the second space. Vocabularies must match per language.
    """
    for name, a, b in (("source", c1_src, c2_src), ("target", c1_tgt, c2_tgt)):
        if a.words != b.words:
            missing = [w for w in a.words if w not in b.word_index][:5]
            extra = [w for w in b.words if w not in a.word_index][:5]
            raise ValueError(
                f"{name} vocabularies differ between the two spaces "
                f"(first-only sample: {missing}, second-only sample: {extra})"
            )
    seed.check_bounds(len(c1_src), len(c1_tgt))
    if len(seed) < 1:
        raise ValueError("need at least one seed pair to fit the fusion map")
    rows_c1 = np.concatenate([c1_src.matrix[seed.src], c1_tgt.matrix[seed.tgt]])
    rows_c2 = np.concatenate([c2_src.matrix[seed.src], c2_tgt.matrix[seed.tgt]])
    fmap = generalized_procrustes(
        _unit_rows(rows_c1, "first-space seed rows"),
        _unit_rows(rows_c2, "second-space seed rows"),
        lam,
        threads,
    )
    fused_src = _interpolate_rows(c1_src.matrix, c2_src.matrix, fmap, "source rows", threads)
    fused_tgt = _interpolate_rows(c1_tgt.matrix, c2_tgt.matrix, fmap, "target rows", threads)
    return (
        VocabEmbedding(c1_src.words, fused_src),
        VocabEmbedding(c1_tgt.words, fused_tgt),
    )
