"""Synthetic bilingual benchmark with a known gold lexicon.

The target language is a random orthogonal rotation of the source embeddings
plus optional Gaussian noise, so the planted one-to-one lexicon is exactly
recoverable at zero noise and the whole pipeline can be smoke-tested without
real data.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import BilingualDictionary, PairOrigin, VocabEmbedding
from . import io as bio


@dataclass
class SyntheticSpec:
    vocab_size: int = 2000
    dim: int = 64
    noise_sigma: float = 0.0
    seed_pairs: int = 200
    test_pairs: int = 500
    rng_seed: int = 0
    shuffle: bool = False

    def __post_init__(self) -> None:
        if self.vocab_size < 1:
            raise ValueError("vocab_size must be positive")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.seed_pairs < 0 or self.test_pairs < 0:
            raise ValueError("pair counts must be non-negative")
        if self.seed_pairs + self.test_pairs > self.vocab_size:
            raise ValueError(
                f"seed_pairs + test_pairs = {self.seed_pairs + self.test_pairs} "
                f"exceeds vocab_size = {self.vocab_size}"
            )


def _random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _unit(m: np.ndarray) -> np.ndarray:
    return m / np.linalg.norm(m, axis=1)[:, None]


def generate(
    spec: SyntheticSpec,
) -> tuple[VocabEmbedding, VocabEmbedding, BilingualDictionary, BilingualDictionary]:
    """Build (source, target, seed dictionary, test dictionary).

    Word s{i} translates to t{i}. Seed pairs take the first indices, test
    pairs the following ones; they never overlap. With shuffle=True the
    target vocabulary is randomly reordered (dictionaries follow), which
    surfaces any code path confusing row order with correspondence.
    """
    rng = np.random.default_rng(spec.rng_seed)
    src_matrix = _unit(rng.standard_normal((spec.vocab_size, spec.dim)))
    rotation = _random_rotation(spec.dim, rng)
    tgt_matrix = src_matrix @ rotation
    if spec.noise_sigma > 0:
        tgt_matrix = tgt_matrix + rng.normal(0.0, spec.noise_sigma, tgt_matrix.shape)
    tgt_matrix = _unit(tgt_matrix)

    src_words = [f"s{i}" for i in range(spec.vocab_size)]
    tgt_words = [f"t{i}" for i in range(spec.vocab_size)]
    tgt_of_src = np.arange(spec.vocab_size)
    if spec.shuffle:
        perm = rng.permutation(spec.vocab_size)  # perm[j] = word now stored at row j
        tgt_matrix = tgt_matrix[perm]
        tgt_words = [f"t{i}" for i in perm]
        tgt_of_src = np.argsort(perm)  # row where word t{i} ended up

    seed = BilingualDictionary.from_pairs(
        [(i, int(tgt_of_src[i])) for i in range(spec.seed_pairs)], PairOrigin.SEED
    )
    test = BilingualDictionary.from_pairs(
        [
            (i, int(tgt_of_src[i]))
            for i in range(spec.seed_pairs, spec.seed_pairs + spec.test_pairs)
        ],
        PairOrigin.SEED,
    )
    return (
        VocabEmbedding(src_words, src_matrix),
        VocabEmbedding(tgt_words, tgt_matrix),
        seed,
        test,
    )


def write_instance(spec: SyntheticSpec, out_dir: str | Path) -> dict[str, Path]:
    """Generate and write src.vec, tgt.vec, seed.tsv, test.tsv into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    src, tgt, seed, test = generate(spec)
    paths = {
        "src": out / "src.vec",
        "tgt": out / "tgt.vec",
        "seed": out / "seed.tsv",
        "test": out / "test.tsv",
    }
    bio.write_embeddings_text(src, paths["src"])
    bio.write_embeddings_text(tgt, paths["tgt"])
    bio.write_dictionary_tsv(seed, src, tgt, paths["seed"])
    bio.write_dictionary_tsv(test, src, tgt, paths["test"])
    return paths
