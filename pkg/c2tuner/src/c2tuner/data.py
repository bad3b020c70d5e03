"""Reading the training-data files produced by the first-stage aligner.

Three tab-separated inputs drive fine-tuning: the seed dictionary
(src<TAB>tgt), the exported candidate list (src<TAB>tgt<TAB>score, sorted
by descending score), and the negatives file (src<TAB>tgt<TAB>src negatives
space-joined<TAB>tgt negatives). Vocabulary lists are one word per line.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

WordPair = tuple[str, str]

DEFAULT_TOP_N = 4000


class DataFormatError(ValueError):
    pass


def load_seed_tsv(path: str | Path) -> list[WordPair]:
    pairs: list[WordPair] = []
    seen: set[WordPair] = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise DataFormatError(f"{path}:{lineno}: expected two tab-separated words")
        pair = (fields[0], fields[1])
        if pair in seen:
            continue
        seen.add(pair)
        pairs.append(pair)
    if not pairs:
        raise DataFormatError(f"{path}: no dictionary pairs")
    return pairs


def load_candidates_tsv(path: str | Path) -> list[tuple[str, str, float]]:
    rows: list[tuple[str, str, float]] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise DataFormatError(f"{path}:{lineno}: expected src, tgt, score columns")
        try:
            score = float(fields[2])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: bad score {fields[2]!r}") from exc
        rows.append((fields[0], fields[1], score))
    for prev, cur in zip(rows, rows[1:]):
        if cur[2] > prev[2]:
            raise DataFormatError(f"{path}: candidate scores are not sorted descending")
    return rows


def load_negatives_tsv(
    path: str | Path, n_neg: int
) -> dict[WordPair, tuple[list[str], list[str]]]:
    """Per-pair fixed negatives, truncated to the first n_neg of each side."""
    table: dict[WordPair, tuple[list[str], list[str]]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise DataFormatError(
                f"{path}:{lineno}: expected src, tgt, src-negatives, tgt-negatives"
            )
        src_negs = fields[2].split(" ") if fields[2] else []
        tgt_negs = fields[3].split(" ") if fields[3] else []
        if len(src_negs) < n_neg or len(tgt_negs) < n_neg:
            raise DataFormatError(
                f"{path}:{lineno}: has {len(src_negs)}/{len(tgt_negs)} negatives, "
                f"need {n_neg} per side"
            )
        table[(fields[0], fields[1])] = (src_negs[:n_neg], tgt_negs[:n_neg])
    if not table:
        raise DataFormatError(f"{path}: no negative rows")
    return table


def _as_pairs(value) -> list[WordPair]:
    if isinstance(value, (str, Path)):
        return load_seed_tsv(value)
    return [(s, t) for s, t in value]


def _as_candidates(value) -> list[tuple[str, str, float]]:
    if isinstance(value, (str, Path)):
        return load_candidates_tsv(value)
    return [(s, t, float(score)) for s, t, score in value]


def build_cl_dictionary(
    d0,
    c1_candidates=None,
    mode: str = "5k",
    top_n: int = DEFAULT_TOP_N,
) -> list[WordPair]:
    """Positive pairs for fine-tuning.

    5k mode trains on the seed dictionary as-is. 1k mode appends the top_n
    highest-confidence induced candidates that are not already seed pairs,
    keeping the candidate file's score order. Inputs may be file paths or
    already-parsed sequences.
    """
    seed = _as_pairs(d0)
    if mode == "5k":
        return list(seed)
    if mode != "1k":
        raise ValueError(f"unknown mode {mode!r}; expected '5k' or '1k'")
    if c1_candidates is None:
        raise ValueError("1k mode needs the exported candidate file")
    if top_n < 0:
        raise ValueError("top_n must be >= 0")
    candidates = _as_candidates(c1_candidates)
    seen = set(seed)
    out = list(seed)
    for s, t, _ in candidates[:top_n]:
        if (s, t) in seen:
            continue
        seen.add((s, t))
        out.append((s, t))
    return out


def load_vocab(path: str | Path) -> list[str]:
    words = [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line]
    if not words:
        raise DataFormatError(f"{path}: empty vocabulary file")
    return words


def resolve_negatives(
    pairs: Sequence[WordPair],
    negatives: dict[WordPair, tuple[list[str], list[str]]],
) -> list[tuple[list[str], list[str]]]:
    """Line up each training pair with its fixed negatives; missing is fatal."""
    rows = []
    for pair in pairs:
        if pair not in negatives:
            raise ValueError(f"no negatives for pair {pair[0]!r} -> {pair[1]!r}")
        rows.append(negatives[pair])
    return rows
