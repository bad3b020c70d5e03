import logging

import numpy as np
import pytest

from blialign.contrastive import TrainConfig
from blialign.data import BilingualDictionary, PairOrigin, VocabEmbedding, l2_normalize
from blialign.mapping import advanced_mapping
from blialign.selflearn import (
    C1Config,
    augment_dictionary,
    export_candidates,
    preset,
    run_c1,
)


def unit(m):
    return m / np.linalg.norm(m, axis=1)[:, None]


def oracle_augment(d0, x, y, n_freq, n_aug, k):
    """Brute-force re-derivation of the augmentation contract."""
    xs = unit(np.asarray(x, dtype=float)[:n_freq])
    ys = unit(np.asarray(y, dtype=float)[:n_freq])
    cos = xs @ ys.T
    r_tgt = np.sort(cos, axis=0)[-k:, :].mean(axis=0)  # per target word
    r_src = np.sort(cos, axis=1)[:, -k:].mean(axis=1)  # per source word

    fwd = []
    for s in range(len(xs)):
        partial = 2.0 * cos[s] - r_tgt
        t = int(np.argmax(partial))
        fwd.append((s, t, partial[t] - r_src[s]))
    fwd.sort(key=lambda z: (-z[2], z[0], z[1]))
    bwd = []
    for t in range(len(ys)):
        partial = 2.0 * cos[:, t] - r_src
        s = int(np.argmax(partial))
        bwd.append((s, t, partial[s] - r_tgt[t]))
    bwd.sort(key=lambda z: (-z[2], z[0], z[1]))

    seed = d0.as_set()
    by_src, by_tgt = {}, {}
    for s, t in seed:
        by_src.setdefault(s, set()).add(t)
        by_tgt.setdefault(t, set()).add(s)
    chosen, origins, seen = [], [], set()
    for cands, origin in (
        (fwd[:n_aug], PairOrigin.FORWARD_AUGMENTED),
        (bwd[:n_aug], PairOrigin.BACKWARD_AUGMENTED),
    ):
        for s, t, _ in cands:
            if (s, t) in seen:
                continue
            seen.add((s, t))
            if (s, t) in seed:
                continue
            if s in by_src and t not in by_src[s]:
                continue
            if t in by_tgt and s not in by_tgt[t]:
                continue
            chosen.append((s, t))
            origins.append(origin)
    return chosen, origins


class TestAugmentDictionary:
    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(0)
        for trial in range(10):
            n = int(rng.integers(12, 50))
            dim = int(rng.integers(3, 8))
            x = rng.standard_normal((n, dim))
            y = rng.standard_normal((n, dim))
            n_freq = int(rng.integers(8, n + 1))
            n_aug = int(rng.integers(1, n_freq + 1))
            k = int(rng.integers(1, 6))
            d0 = BilingualDictionary.from_pairs(
                [(int(s), int(t)) for s, t in zip(rng.choice(n, 3, replace=False),
                                                  rng.choice(n, 3, replace=False))]
            )
            got = augment_dictionary(d0, x, y, n_freq, n_aug, k)
            pairs, origins = oracle_augment(d0, x, y, n_freq, n_aug, k)
            assert list(got) == pairs
            assert list(got.origins) == origins

    def test_seed_conflicts_filtered(self):
        # Identity spaces: every word's best candidate is itself. Seed (0, 1)
        # knocks out both (0, 0) (source reused) and (1, 1) (target reused).
        eye = np.eye(5)
        d0 = BilingualDictionary.from_pairs([(0, 1)])
        got = augment_dictionary(d0, eye, eye, n_freq=5, n_aug=5, k=1)
        assert list(got) == [(2, 2), (3, 3), (4, 4)]
        assert all(o is PairOrigin.FORWARD_AUGMENTED for o in got.origins)

    def test_backward_only_pair_keeps_backward_origin(self):
        xs = np.eye(2)
        ys = np.array([[1.0, 0.0], [0.95, np.sqrt(1 - 0.95**2)]])
        d0 = BilingualDictionary.from_pairs([])
        got = augment_dictionary(d0, xs, ys, n_freq=2, n_aug=2, k=1)
        assert list(got) == [(0, 0), (1, 1), (0, 1)]
        assert list(got.origins) == [
            PairOrigin.FORWARD_AUGMENTED,
            PairOrigin.FORWARD_AUGMENTED,
            PairOrigin.BACKWARD_AUGMENTED,
        ]

    def test_forward_origin_wins_duplicates(self):
        eye = np.eye(3)
        got = augment_dictionary(
            BilingualDictionary.from_pairs([]), eye, eye, n_freq=3, n_aug=3, k=1
        )
        assert list(got) == [(0, 0), (1, 1), (2, 2)]
        assert all(o is PairOrigin.FORWARD_AUGMENTED for o in got.origins)

    def test_size_bound(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((30, 5))
        y = rng.standard_normal((30, 5))
        d0 = BilingualDictionary.from_pairs([(0, 0)])
        for n_aug in (1, 5, 20):
            got = augment_dictionary(d0, x, y, 30, n_aug, 3)
            assert len(got) <= 2 * n_aug

    def test_candidates_restricted_to_frequent_words(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((40, 6))
        y = rng.standard_normal((40, 6))
        got = augment_dictionary(BilingualDictionary.from_pairs([]), x, y, 12, 12, 2)
        assert got.pairs.max() < 12

    def test_n_aug_zero_empty(self):
        got = augment_dictionary(
            BilingualDictionary.from_pairs([(0, 0)]), np.eye(4), np.eye(4), 4, 0
        )
        assert len(got) == 0

    def test_n_aug_clamped_with_warning(self, caplog):
        with caplog.at_level(logging.WARNING):
            got = augment_dictionary(
                BilingualDictionary.from_pairs([]), np.eye(4), np.eye(4), 3, 10, k=1
            )
        assert any("clamping" in r.message for r in caplog.records)
        assert len(got) == 3  # identity: one surviving pair per word

    def test_thread_invariance(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((64, 8))
        y = rng.standard_normal((64, 8))
        d0 = BilingualDictionary.from_pairs([(0, 0), (1, 2)])
        one = augment_dictionary(d0, x, y, 64, 20, 4, threads=1)
        many = augment_dictionary(d0, x, y, 64, 20, 4, threads=4)
        assert np.array_equal(one.pairs, many.pairs)


class TestExportCandidates:
    def test_globally_ranked_and_filtered(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((30, 6))
        y = rng.standard_normal((30, 6))
        d0 = BilingualDictionary.from_pairs([(0, 0), (1, 1)])
        pairs, scores = export_candidates(x, y, d0, n_freq=30, top_n=15, k=3)
        assert len(pairs) <= 15
        assert (np.diff(scores) <= 1e-15).all()  # descending
        seed_src = set(d0.src.tolist())
        seed_tgt = set(d0.tgt.tolist())
        for s, t in pairs:
            assert int(s) not in seed_src
            assert int(t) not in seed_tgt

    def test_prefix_property(self):
        # The top-n list is a prefix of the top-m list for n < m.
        rng = np.random.default_rng(5)
        x = rng.standard_normal((25, 5))
        y = rng.standard_normal((25, 5))
        d0 = BilingualDictionary.from_pairs([(3, 3)])
        small, _ = export_candidates(x, y, d0, 25, 5, k=2)
        large, _ = export_candidates(x, y, d0, 25, 12, k=2)
        np.testing.assert_array_equal(small, large[: len(small)])

    def test_union_of_directions(self):
        # Candidate set equals the filtered union of both directional scans.
        rng = np.random.default_rng(6)
        x = rng.standard_normal((20, 4))
        y = rng.standard_normal((20, 4))
        d0 = BilingualDictionary.from_pairs([(0, 0)])
        pairs, _ = export_candidates(x, y, d0, 20, 100, k=2)
        aug = augment_dictionary(d0, x, y, 20, 20, k=2)  # n_aug = n_freq: all
        assert {(int(s), int(t)) for s, t in pairs} == aug.as_set()


def make_rotation_instance(rng, n, dim, n_seed):
    src = unit(rng.standard_normal((n, dim)))
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    tgt = src @ q
    x = l2_normalize(VocabEmbedding([f"s{i}" for i in range(n)], src))
    y = l2_normalize(VocabEmbedding([f"t{i}" for i in range(n)], tgt))
    d0 = BilingualDictionary.from_pairs([(i, i) for i in range(n_seed)])
    return x, y, d0


class TestRunC1:
    def test_requires_normalized_inputs(self):
        rng = np.random.default_rng(7)
        x = VocabEmbedding(["a", "b", "c"], rng.standard_normal((3, 4)) * 3)
        y = l2_normalize(VocabEmbedding(["d", "e", "f"], rng.standard_normal((3, 4))))
        d0 = BilingualDictionary.from_pairs([(0, 0), (1, 1)])
        cfg = C1Config(n_iter=1, n_freq=3, n_aug=0, train=TrainConfig(n_cl=0))
        with pytest.raises(ValueError, match="l2-normalized"):
            run_c1(x, y, d0, cfg)

    def test_reduces_to_advanced_mapping(self):
        # n_iter=1, no fine-tuning, no augmentation: identical to the
        # closed-form fit on the seed dictionary.
        rng = np.random.default_rng(8)
        x, y, d0 = make_rotation_instance(rng, 50, 8, 10)
        cfg = C1Config(n_iter=1, n_freq=50, n_aug=0, train=TrainConfig(n_cl=0))
        maps, final = run_c1(x, y, d0, cfg)
        direct = advanced_mapping(x.matrix[d0.src], y.matrix[d0.tgt])
        assert np.array_equal(maps.w_x, direct.w_x)
        assert np.array_equal(maps.w_y, direct.w_y)
        assert list(final) == list(d0)

    def test_invariant_to_n_iter_without_learning(self):
        rng = np.random.default_rng(9)
        x, y, d0 = make_rotation_instance(rng, 40, 6, 8)
        results = []
        for n_iter in (1, 2, 3):
            cfg = C1Config(n_iter=n_iter, n_freq=40, n_aug=0, train=TrainConfig(n_cl=0))
            maps, _ = run_c1(x, y, d0, cfg)
            results.append(maps)
        assert np.array_equal(results[0].w_x, results[1].w_x)
        assert np.array_equal(results[1].w_x, results[2].w_x)

    def test_supervised_flag_controls_training_dictionary(self):
        rng = np.random.default_rng(10)
        x, y, d0 = make_rotation_instance(rng, 40, 6, 8)
        base = dict(n_iter=2, n_freq=40, n_aug=10, csls_k=3)
        train = dict(n_cl=2, n_neg=3, lr=0.1, gamma=1.0)

        records = []
        cfg = C1Config(**base, supervised=True, train=TrainConfig(**train))
        run_c1(x, y, d0, cfg, inspect=records.append)
        assert all(rec.d_cl is d0 for rec in records)

        records = []
        cfg = C1Config(**base, supervised=False, train=TrainConfig(**train))
        run_c1(x, y, d0, cfg, inspect=records.append)
        assert records[0].d_cl is d0  # nothing augmented yet
        assert len(records[1].d_cl) == len(records[0].d_next)
        assert list(records[1].d_cl) == list(records[0].d_next)

    def test_dictionary_grows_from_seed_prefix(self):
        rng = np.random.default_rng(11)
        x, y, d0 = make_rotation_instance(rng, 40, 6, 8)
        cfg = C1Config(
            n_iter=2, n_freq=40, n_aug=10, supervised=True, csls_k=3,
            train=TrainConfig(n_cl=1, n_neg=2, lr=0.1, gamma=1.0),
        )
        maps, final = run_c1(x, y, d0, cfg)
        assert list(final)[: len(d0)] == list(d0)
        assert all(o is PairOrigin.SEED for o in final.origins[: len(d0)])
        for s, t in list(final)[len(d0):]:
            assert (s, t) not in d0.as_set()

    def test_inspect_hook_sees_every_iteration(self):
        rng = np.random.default_rng(12)
        x, y, d0 = make_rotation_instance(rng, 30, 5, 6)
        cfg = C1Config(
            n_iter=3, n_freq=30, n_aug=5, supervised=True, csls_k=2,
            train=TrainConfig(n_cl=2, n_neg=2, lr=0.1, gamma=1.0),
        )
        records = []
        run_c1(x, y, d0, cfg, inspect=records.append)
        assert [rec.iteration for rec in records] == [1, 2, 3]
        assert all(len(rec.losses) == 2 for rec in records)

    def test_seed_bounds_and_size_validated(self):
        rng = np.random.default_rng(13)
        x, y, _ = make_rotation_instance(rng, 10, 4, 2)
        cfg = C1Config(n_iter=1, n_freq=10, n_aug=0, train=TrainConfig(n_cl=0))
        with pytest.raises(ValueError, match="at least 2 seed"):
            run_c1(x, y, BilingualDictionary.from_pairs([(0, 0)]), cfg)
        with pytest.raises(ValueError, match="out of range"):
            run_c1(x, y, BilingualDictionary.from_pairs([(0, 0), (1, 99)]), cfg)


class TestPresets:
    def test_modes(self):
        big = preset("5k")
        assert (big.n_iter, big.n_freq, big.n_aug, big.supervised) == (2, 60000, 10000, True)
        assert (big.train.n_cl, big.train.n_neg) == (200, 150)
        assert (big.train.lr, big.train.gamma) == (1.5, 0.99)
        small = preset("1k")
        assert (small.n_iter, small.n_freq, small.n_aug, small.supervised) == (3, 20000, 6000, False)
        assert (small.train.n_cl, small.train.n_neg) == (50, 60)
        assert (small.train.lr, small.train.gamma) == (2.0, 1.0)
        assert big.train.tau == small.train.tau == 1.0
        with pytest.raises(ValueError, match="unknown preset"):
            preset("2k")

    def test_config_validation(self):
        with pytest.raises(ValueError):
            C1Config(n_iter=0)
        with pytest.raises(ValueError):
            C1Config(n_freq=0)
        with pytest.raises(ValueError):
            C1Config(n_aug=-1)
        with pytest.raises(ValueError):
            C1Config(csls_k=0)
