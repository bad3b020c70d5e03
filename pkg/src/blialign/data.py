"""Core data types: embedding vocabularies and bilingual dictionaries."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np


class PairOrigin(Enum):
    """How a translation pair entered a training dictionary."""

    SEED = "seed"
    FORWARD_AUGMENTED = "forward"
    BACKWARD_AUGMENTED = "backward"


@dataclass(eq=False)
class VocabEmbedding:
    """An ordered vocabulary with one embedding row per word.

    Rows are held as float64 regardless of on-disk precision. Word order is
    meaningful: row i belongs to ``words[i]``, and lower index means higher
    corpus frequency in the usual pre-trained embedding convention.
    """

    words: list[str]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        self.words = list(self.words)
        self.matrix = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.float64))
        if self.matrix.ndim != 2:
            raise ValueError(f"embedding matrix must be 2-D, got shape {self.matrix.shape}")
        if len(self.words) != self.matrix.shape[0]:
            raise ValueError(
                f"{len(self.words)} words but {self.matrix.shape[0]} embedding rows"
            )
        if self.matrix.shape[1] < 1:
            raise ValueError("embedding dimension must be positive")
        if len(set(self.words)) != len(self.words):
            raise ValueError("vocabulary contains duplicate words")

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def __len__(self) -> int:
        return len(self.words)

    @cached_property
    def word_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.words)}

    def head(self, n: int) -> "VocabEmbedding":
        """The n most frequent words (a prefix of the vocabulary)."""
        if n < 0:
            raise ValueError("head size must be non-negative")
        n = min(n, len(self.words))
        return VocabEmbedding(self.words[:n], self.matrix[:n])


def l2_normalize(emb: VocabEmbedding) -> VocabEmbedding:
    """Return a copy of emb with unit-length rows.

    A zero row cannot be normalized and raises, naming the offending word.
    """
    norms = np.linalg.norm(emb.matrix, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(f"cannot l2-normalize zero vector for word {emb.words[zero[0]]!r}")
    return VocabEmbedding(emb.words, emb.matrix / norms[:, None])


@dataclass(eq=False)
class BilingualDictionary:
    """Ordered list of (source index, target index) pairs with provenance.

    Pairs are unique; a source index may map to several targets and vice
    versa. ``origins[i]`` records how pair i was obtained.
    """

    pairs: np.ndarray
    origins: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.pairs = np.asarray(self.pairs, dtype=np.int64)
        if self.pairs.size == 0:
            self.pairs = self.pairs.reshape(0, 2)
        if self.pairs.ndim != 2 or self.pairs.shape[1] != 2:
            raise ValueError(f"pairs must have shape (n, 2), got {self.pairs.shape}")
        if self.origins is None:
            self.origins = np.array([PairOrigin.SEED] * len(self.pairs), dtype=object)
        else:
            self.origins = np.asarray(self.origins, dtype=object)
        if len(self.origins) != len(self.pairs):
            raise ValueError("origins length does not match pair count")
        if len(self.as_set()) != len(self.pairs):
            raise ValueError("dictionary contains duplicate pairs")

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple[int, int]],
        origin: PairOrigin | Sequence[PairOrigin] = PairOrigin.SEED,
    ) -> "BilingualDictionary":
        arr = np.array(list(pairs), dtype=np.int64).reshape(-1, 2)
        if isinstance(origin, PairOrigin):
            origins = np.array([origin] * len(arr), dtype=object)
        else:
            origins = np.array(list(origin), dtype=object)
        return cls(arr, origins)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        for s, t in self.pairs:
            yield int(s), int(t)

    @property
    def src(self) -> np.ndarray:
        return self.pairs[:, 0]

    @property
    def tgt(self) -> np.ndarray:
        return self.pairs[:, 1]

    def as_set(self) -> set[tuple[int, int]]:
        return {(int(s), int(t)) for s, t in self.pairs}

    def check_bounds(self, n_src: int, n_tgt: int) -> None:
        """Raise if any index falls outside the given vocabulary sizes."""
        if len(self.pairs) == 0:
            return
        if self.pairs.min() < 0:
            raise ValueError("dictionary contains negative indices")
        if self.src.max() >= n_src:
            raise ValueError(
                f"source index {int(self.src.max())} out of range for vocab of {n_src}"
            )
        if self.tgt.max() >= n_tgt:
            raise ValueError(
                f"target index {int(self.tgt.max())} out of range for vocab of {n_tgt}"
            )

    def union(self, other: "BilingualDictionary") -> "BilingualDictionary":
        """Pairs of self followed by pairs of other, first occurrence kept."""
        seen = self.as_set()
        keep = [i for i, (s, t) in enumerate(other) if (s, t) not in seen]
        if not keep:
            return BilingualDictionary(self.pairs.copy(), self.origins.copy())
        pairs = np.concatenate([self.pairs, other.pairs[keep]])
        origins = np.concatenate([self.origins, other.origins[keep]])
        return BilingualDictionary(pairs, origins)
