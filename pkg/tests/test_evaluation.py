import json

import numpy as np
import pytest

from blialign.data import BilingualDictionary
from blialign.evaluation import (
    EvalReport,
    evaluate,
    format_report,
    rankings_from_matrix,
    report_json,
)


def d(pairs):
    return BilingualDictionary.from_pairs(pairs)


class TestEvaluate:
    def test_hand_computed(self):
        # q0: gold 5 at rank 1; q1: gold 7 at rank 3; q2: gold 9 missing.
        test = d([(0, 5), (1, 7), (2, 9)])
        rankings = {0: [5, 1, 2], 1: [4, 6, 7], 2: [0, 1, 2]}
        rep = evaluate(test, rankings)
        assert rep.n_queries == 3
        assert rep.p_at_1 == pytest.approx(1 / 3)
        assert rep.mrr == pytest.approx((1.0 + 1 / 3 + 0.0) / 3)

    def test_multiple_gold_targets_best_rank_counts(self):
        # Source 0 accepts 5 or 6; the better-ranked one scores.
        test = d([(0, 5), (0, 6)])
        rep = evaluate(test, {0: [6, 5]})
        assert rep.n_queries == 1
        assert rep.p_at_1 == 1.0
        assert rep.mrr == 1.0

    def test_depth_truncation(self):
        test = d([(0, 3)])
        rankings = {0: [9, 8, 3]}
        assert evaluate(test, rankings).mrr == pytest.approx(1 / 3)
        truncated = evaluate(test, rankings, depth=2)
        assert truncated.mrr == 0.0
        assert truncated.depth == 2

    def test_missing_ranking_rejected(self):
        with pytest.raises(ValueError, match="no ranking"):
            evaluate(d([(0, 1), (3, 2)]), {0: [1]})

    def test_empty_ranking_rejected(self):
        with pytest.raises(ValueError, match="no ranking"):
            evaluate(d([(0, 1)]), {0: []})

    def test_empty_dictionary_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            evaluate(d([]), {})

    def test_p1_never_exceeds_mrr(self):
        rng = np.random.default_rng(0)
        for trial in range(20):
            n = int(rng.integers(1, 15))
            pairs = sorted({(int(s), int(rng.integers(0, 10))) for s in range(n)})
            rankings = {s: rng.permutation(10).tolist() for s, _ in pairs}
            rep = evaluate(d(pairs), rankings)
            assert rep.p_at_1 <= rep.mrr + 1e-12

    def test_per_query_records(self):
        test = d([(0, 5), (1, 7)])
        rep = evaluate(
            test,
            {0: [5], 1: [7]},
            src_words=["zero", "one"],
            tgt_words=[f"w{i}" for i in range(8)],
            keep_per_query=True,
        )
        assert [q.source for q in rep.per_query] == ["zero", "one"]
        assert rep.per_query[0].predicted == "w5"
        assert rep.per_query[0].rank == 1

    def test_duplicate_sources_count_once(self):
        test = d([(0, 1), (0, 2), (3, 4)])
        rep = evaluate(test, {0: [2], 3: [0]})
        assert rep.n_queries == 2
        assert rep.p_at_1 == pytest.approx(0.5)


class TestReportFormats:
    def make(self):
        return EvalReport(p_at_1=0.5, mrr=0.625, n_queries=8, depth=10)

    def test_format_lines(self):
        text = format_report(self.make())
        lines = dict(line.split("=") for line in text.splitlines())
        assert lines["n_queries"] == "8"
        assert lines["depth"] == "10"
        assert float(lines["p_at_1"]) == 0.5
        assert float(lines["mrr"]) == 0.625

    def test_format_extra_fields(self):
        text = format_report(self.make(), {"measure": "csls"})
        assert "measure=csls" in text.splitlines()

    def test_json_round_trip(self):
        parsed = json.loads(report_json(self.make()))
        assert parsed == {"p_at_1": 0.5, "mrr": 0.625, "n_queries": 8, "depth": 10}


class TestRankingsFromMatrix:
    def test_maps_rows_to_sources(self):
        idx = np.array([[3, 1], [0, 2]])
        got = rankings_from_matrix(idx, [7, 9])
        assert sorted(got) == [7, 9]
        np.testing.assert_array_equal(got[7], [3, 1])
        np.testing.assert_array_equal(got[9], [0, 2])

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="len"):
            rankings_from_matrix(np.zeros((2, 2), dtype=int), [1, 2, 3])
