"""Scoring induced lexicons against a gold test dictionary."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import BilingualDictionary


@dataclass(eq=False)
class QueryResult:
    """One evaluated source word."""

    source: str
    predicted: str
    gold: list[str]
    rank: int | None  # 1-based rank of the best gold translation, None if absent


@dataclass(eq=False)
class EvalReport:
    p_at_1: float
    mrr: float
    n_queries: int
    depth: int
    per_query: list[QueryResult] | None = None

    def as_dict(self) -> dict:
        return {
            "p_at_1": self.p_at_1,
            "mrr": self.mrr,
            "n_queries": self.n_queries,
            "depth": self.depth,
        }


def evaluate(
    test: BilingualDictionary,
    rankings: Mapping[int, Sequence[int]],
    depth: int | None = None,
    src_words: Sequence[str] | None = None,
    tgt_words: Sequence[str] | None = None,
    keep_per_query: bool = False,
) -> EvalReport:
    """Precision@1 and mean reciprocal rank over distinct source words.

    Pairs sharing a source word merge into one query with a gold set; a hit
    on any gold target counts. rankings maps source index to candidate target
    indices, best first. The reciprocal rank is 1/rank of the best-ranked
    gold within depth (default: the full ranking), else 0. Pass vocabulary
    word lists to get readable per-query records.
    """
    if len(test) == 0:
        raise ValueError("test dictionary is empty")
    if depth is not None and depth < 1:
        raise ValueError("depth must be at least 1")

    gold: dict[int, list[int]] = {}
    for s, t in test:
        gold.setdefault(s, []).append(t)

    hits = 0
    rr_total = 0.0
    per_query: list[QueryResult] | None = [] if keep_per_query else None
    max_depth = 0
    for s, targets in gold.items():
        ranking = rankings.get(s)
        if ranking is None or len(ranking) == 0:
            raise ValueError(f"no ranking provided for source index {s}")
        cut = len(ranking) if depth is None else min(depth, len(ranking))
        max_depth = max(max_depth, cut)
        gold_set = set(targets)
        rank = None
        for pos in range(cut):
            if int(ranking[pos]) in gold_set:
                rank = pos + 1
                break
        if rank == 1:
            hits += 1
        if rank is not None:
            rr_total += 1.0 / rank
        if per_query is not None:
            per_query.append(
                QueryResult(
                    source=src_words[s] if src_words is not None else str(s),
                    predicted=(
                        tgt_words[int(ranking[0])] if tgt_words is not None else str(int(ranking[0]))
                    ),
                    gold=[tgt_words[t] if tgt_words is not None else str(t) for t in targets],
                    rank=rank,
                )
            )
    n = len(gold)
    return EvalReport(hits / n, rr_total / n, n, max_depth, per_query)


def format_report(report: EvalReport, extra: Mapping[str, object] | None = None) -> str:
    """Line-oriented key=value rendering, stable key order."""
    fields: dict[str, object] = {
        "n_queries": report.n_queries,
        "depth": report.depth,
        "p_at_1": f"{report.p_at_1:.6f}",
        "mrr": f"{report.mrr:.6f}",
    }
    if extra:
        fields.update(extra)
    return "".join(f"{k}={v}\n" for k, v in fields.items())


def report_json(report: EvalReport, extra: Mapping[str, object] | None = None) -> str:
    payload = report.as_dict()
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def rankings_from_matrix(indices: np.ndarray, sources: Sequence[int]) -> dict[int, np.ndarray]:
    """Pack a (n_queries, k) retrieval result into the rankings mapping."""
    indices = np.asarray(indices)
    if indices.ndim != 2 or indices.shape[0] != len(sources):
        raise ValueError("indices must be (len(sources), k)")
    return {int(s): indices[i] for i, s in enumerate(sources)}
