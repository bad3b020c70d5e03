"""Scikit-learn style front-ends over the functional pipeline."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .data import BilingualDictionary, PairOrigin, VocabEmbedding, l2_normalize
from .evaluation import evaluate, rankings_from_matrix
from .fusion import generalized_procrustes
from .mapping import apply_map
from .retrieval import compute_csls_stats, csls_topk, nn_topk
from .selflearn import C1Config, preset, run_c1


def _as_dictionary(
    pairs, src: VocabEmbedding, tgt: VocabEmbedding
) -> BilingualDictionary:
    """Accept a BilingualDictionary or an iterable of (src, tgt) word pairs."""
    if isinstance(pairs, BilingualDictionary):
        return pairs
    resolved = []
    for s, t in pairs:
        if isinstance(s, str):
            if s not in src.word_index:
                raise ValueError(f"source word {s!r} not in vocabulary")
            s = src.word_index[s]
        if isinstance(t, str):
            if t not in tgt.word_index:
                raise ValueError(f"target word {t!r} not in vocabulary")
            t = tgt.word_index[t]
        resolved.append((int(s), int(t)))
    return BilingualDictionary.from_pairs(resolved, PairOrigin.SEED)


class ContrastiveBliAligner(BaseEstimator):
    """Learns dual linear maps between two embedding spaces from a seed lexicon.

    Parameters default to the built-in mode presets; any explicitly set
    parameter overrides its preset value. fit() takes the two vocabularies
    and the seed dictionary; predict() translates source words.
    """

    def __init__(
        self,
        mode: str = "5k",
        n_iter: int | None = None,
        n_cl: int | None = None,
        n_neg: int | None = None,
        n_freq: int | None = None,
        n_aug: int | None = None,
        supervised: bool | None = None,
        lr: float | None = None,
        gamma: float | None = None,
        tau: float | None = None,
        refresh_interval: int | None = None,
        csls_k: int = 10,
        threads: int | None = None,
    ):
        self.mode = mode
        self.n_iter = n_iter
        self.n_cl = n_cl
        self.n_neg = n_neg
        self.n_freq = n_freq
        self.n_aug = n_aug
        self.supervised = supervised
        self.lr = lr
        self.gamma = gamma
        self.tau = tau
        self.refresh_interval = refresh_interval
        self.csls_k = csls_k
        self.threads = threads

    def _config(self) -> C1Config:
        cfg = preset(self.mode)
        for name in ("n_iter", "n_freq", "n_aug", "supervised"):
            value = getattr(self, name)
            if value is not None:
                setattr(cfg, name, value)
        for name in ("n_cl", "n_neg", "lr", "gamma", "tau", "refresh_interval"):
            value = getattr(self, name)
            if value is not None:
                setattr(cfg.train, name, value)
        cfg.csls_k = self.csls_k
        cfg.__post_init__()
        cfg.train.__post_init__()
        return cfg

    def fit(self, X: VocabEmbedding, Y: VocabEmbedding, seed=None):
        """Learn the maps. X, Y: vocabularies; seed: dictionary or word pairs."""
        if seed is None:
            raise ValueError("a seed dictionary is required")
        self.src_ = l2_normalize(X)
        self.tgt_ = l2_normalize(Y)
        dictionary = _as_dictionary(seed, self.src_, self.tgt_)
        self.maps_, self.dictionary_ = run_c1(
            self.src_, self.tgt_, dictionary, self._config(), threads=self.threads
        )
        self.src_mapped_ = apply_map(self.src_, self.maps_.w_x, self.threads)
        self.tgt_mapped_ = apply_map(self.tgt_, self.maps_.w_y, self.threads)
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "maps_"):
            raise NotFittedError("this aligner is not fitted yet; call fit() first")

    def transform(self, X, side: str = "source") -> np.ndarray:
        """Project rows (matrix or VocabEmbedding) through the learned map."""
        self._check_fitted()
        if side not in ("source", "target"):
            raise ValueError("side must be 'source' or 'target'")
        m = X.matrix if isinstance(X, VocabEmbedding) else np.asarray(X, dtype=np.float64)
        w = self.maps_.w_x if side == "source" else self.maps_.w_y
        return m @ w

    def _rank(self, source_indices: np.ndarray, k: int, measure: str) -> np.ndarray:
        queries = self.src_mapped_.matrix[source_indices]
        if measure == "csls":
            stats = compute_csls_stats(
                self.src_mapped_, self.tgt_mapped_, self.csls_k, threads=self.threads
            )
            return csls_topk(queries, self.tgt_mapped_, stats, k, threads=self.threads)
        return nn_topk(queries, self.tgt_mapped_, k, measure=measure, threads=self.threads)

    def predict(self, X=None, k: int = 1, measure: str = "csls"):
        """Translate source words (names or indices; default all) to target words.

        Returns a list of words for k=1, else a list of k-best word lists.
        """
        self._check_fitted()
        if X is None:
            indices = np.arange(len(self.src_))
        else:
            indices = np.array(
                [self.src_.word_index[w] if isinstance(w, str) else int(w) for w in X]
            )
        ranked = self._rank(indices, k, measure)
        words = [[self.tgt_.words[t] for t in row] for row in ranked]
        return [row[0] for row in words] if k == 1 else words

    def score(self, test=None, measure: str = "csls", y=None) -> float:
        """Precision@1 on a test dictionary (pairs of words or indices)."""
        self._check_fitted()
        if test is None:
            raise ValueError("a test dictionary is required")
        dictionary = _as_dictionary(test, self.src_, self.tgt_)
        sources = np.unique(dictionary.src)
        ranked = self._rank(sources, 1, measure)
        report = evaluate(dictionary, rankings_from_matrix(ranked, sources))
        return report.p_at_1


class RectangularProcrustes(BaseEstimator, TransformerMixin):
    """Least-squares orthogonal-rows map onto a space of equal or higher dim."""

    def fit(self, X, Y=None):
        if Y is None:
            raise ValueError("target rows Y are required")
        self.map_ = generalized_procrustes(np.asarray(X), np.asarray(Y))
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "map_"):
            raise NotFittedError("this transformer is not fitted yet; call fit() first")
        return np.asarray(X, dtype=np.float64) @ self.map_.w
