"""Closed-form dual linear maps from dictionary-aligned embedding rows.

Both languages get their own square map. The pair is obtained by whitening
each side's dictionary rows, finding the orthogonal alignment between the
whitened spaces by SVD, re-weighting by the square root of the singular
values, and de-whitening, all folded into one matrix per side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import VocabEmbedding
from .parallel import cross_gram, gram, matmul_rows

DEFAULT_RIDGE = 1e-10
EIG_CLAMP = 1e-12
SYMMETRY_TOL = 1e-10


@dataclass(eq=False)
class LinearMapPair:
    """Square maps w_x (source side) and w_y (target side) of equal shape."""

    w_x: np.ndarray
    w_y: np.ndarray

    def __post_init__(self) -> None:
        self.w_x = np.ascontiguousarray(np.asarray(self.w_x, dtype=np.float64))
        self.w_y = np.ascontiguousarray(np.asarray(self.w_y, dtype=np.float64))
        for name, w in (("w_x", self.w_x), ("w_y", self.w_y)):
            if w.ndim != 2 or w.shape[0] != w.shape[1]:
                raise ValueError(f"{name} must be square, got shape {w.shape}")
            if not np.isfinite(w).all():
                raise ValueError(f"{name} contains non-finite values")
        if self.w_x.shape != self.w_y.shape:
            raise ValueError(f"map shapes differ: {self.w_x.shape} vs {self.w_y.shape}")

    @property
    def dim(self) -> int:
        return int(self.w_x.shape[0])

    def copy(self) -> "LinearMapPair":
        return LinearMapPair(self.w_x.copy(), self.w_y.copy())

    @classmethod
    def identity(cls, dim: int) -> "LinearMapPair":
        return cls(np.eye(dim), np.eye(dim))


def _sqrt_and_inv_sqrt(m: np.ndarray, ridge: float) -> tuple[np.ndarray, np.ndarray]:
    """Matrix square root and inverse square root of a PSD matrix.

    One eigendecomposition of (m + ridge*I) feeds both results so they are
    exact functional inverses up to rounding. Eigenvalues are clamped from
    below after the ridge to keep the inverse finite.
    """
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix contains non-finite values")
    if np.abs(m - m.T).max(initial=0.0) > SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric")
    ridged = m + ridge * np.eye(m.shape[0])
    eigvals, eigvecs = np.linalg.eigh(ridged)
    eigvals = np.clip(eigvals, EIG_CLAMP, None)
    root = np.sqrt(eigvals)
    sqrt_m = (eigvecs * root) @ eigvecs.T
    inv_sqrt_m = (eigvecs / root) @ eigvecs.T
    return sqrt_m, inv_sqrt_m


def inverse_sqrt_psd(m: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """(m + ridge*I)^(-1/2) for a symmetric PSD matrix."""
    m = np.asarray(m, dtype=np.float64)
    _, inv_sqrt_m = _sqrt_and_inv_sqrt(m, ridge)
    return inv_sqrt_m


@dataclass(eq=False)
class MappingParts:
    """Factor bundle behind a fitted map pair.

    The SVD factors are only defined jointly (signs and degenerate-subspace
    mixing are arbitrary but consistent between u, s, v), so anything
    recombining the stages must take them from here rather than refactor.
    """

    sqrt_x: np.ndarray
    inv_x: np.ndarray
    sqrt_y: np.ndarray
    inv_y: np.ndarray
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    maps: LinearMapPair


def mapping_parts(
    x_d: np.ndarray,
    y_d: np.ndarray,
    ridge: float = DEFAULT_RIDGE,
    threads: int | None = None,
) -> MappingParts:
    """Fit the dual maps, keeping the intermediate factors."""
    x_d = np.asarray(x_d, dtype=np.float64)
    y_d = np.asarray(y_d, dtype=np.float64)
    if x_d.ndim != 2 or y_d.ndim != 2:
        raise ValueError("dictionary rows must be 2-D matrices")
    if x_d.shape[0] != y_d.shape[0]:
        raise ValueError(f"row counts differ: {x_d.shape[0]} vs {y_d.shape[0]}")
    if x_d.shape[1] != y_d.shape[1]:
        raise ValueError(f"dimensions differ: {x_d.shape[1]} vs {y_d.shape[1]}")
    if x_d.shape[0] < 2:
        raise ValueError("need at least 2 dictionary pairs")
    if not (np.isfinite(x_d).all() and np.isfinite(y_d).all()):
        raise ValueError("dictionary rows contain non-finite values")

    sqrt_x, inv_x = _sqrt_and_inv_sqrt(gram(x_d, threads), ridge)
    sqrt_y, inv_y = _sqrt_and_inv_sqrt(gram(y_d, threads), ridge)
    x_white = matmul_rows(x_d, inv_x, threads)
    y_white = matmul_rows(y_d, inv_y, threads)
    try:
        u, s, vt = np.linalg.svd(cross_gram(x_white, y_white, threads), full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"SVD of whitened cross-covariance failed: {exc}") from exc
    v = vt.T
    root_s = np.sqrt(s)
    w_x = ((inv_x @ u) * root_s) @ (u.T @ sqrt_x @ u)
    w_y = ((inv_y @ v) * root_s) @ (v.T @ sqrt_y @ v)
    return MappingParts(sqrt_x, inv_x, sqrt_y, inv_y, u, s, v, LinearMapPair(w_x, w_y))


def advanced_mapping(
    x_d: np.ndarray,
    y_d: np.ndarray,
    ridge: float = DEFAULT_RIDGE,
    threads: int | None = None,
) -> LinearMapPair:
    """Fit the dual maps on paired dictionary rows x_d, y_d (same row i aligned).

    Steps, folded into w_x: whiten by (x_d^T x_d)^(-1/2), rotate by the left
    singular vectors U of the whitened cross-covariance, re-weight by
    diag(s)^(1/2), de-whiten by U^T (x_d^T x_d)^(1/2) U. Symmetrically with V
    for w_y. Applying w_x and w_y lands both languages in one shared space.
    """
    return mapping_parts(x_d, y_d, ridge, threads).maps


def apply_map(emb: VocabEmbedding, w: np.ndarray, threads: int | None = None) -> VocabEmbedding:
    """Project every embedding row through the map w."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != emb.dim:
        raise ValueError(f"map shape {w.shape} does not fit embeddings of dim {emb.dim}")
    return VocabEmbedding(emb.words, matmul_rows(emb.matrix, w, threads))
