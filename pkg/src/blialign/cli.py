"""Command-line interface.

Subcommands cover the full pipeline: generate a synthetic benchmark, learn
the first-stage maps, export candidate pairs for second-stage training, fuse
two spaces, and evaluate a mapped space against a gold dictionary. All
outputs are deterministic for a given input set, whatever --threads says.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as bio
from .data import BilingualDictionary, VocabEmbedding, l2_normalize
from .contrastive import TrainingDivergedError, mine_hard_negatives
from .evaluation import evaluate, format_report, rankings_from_matrix, report_json
from .fusion import fuse_spaces
from .mapping import apply_map
from .retrieval import compute_csls_stats, csls_topk, nn_topk
from .selflearn import export_candidates, preset, run_c1
from .synthetic import SyntheticSpec, write_instance

log = logging.getLogger(__name__)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $BLI_THREADS, then CPU count)")
    p.add_argument("--verbose", action="store_true", help="debug logging")


def _matrix_embedding(matrix: np.ndarray) -> VocabEmbedding:
    """Wrap a plain matrix (e.g. a learned map) with r0..rN row labels."""
    return VocabEmbedding([f"r{i}" for i in range(matrix.shape[0])], matrix)


def _cmd_train_c1(args: argparse.Namespace) -> int:
    src = l2_normalize(bio.read_embeddings(args.src_emb, args.max_vocab))
    tgt = l2_normalize(bio.read_embeddings(args.tgt_emb, args.max_vocab))
    seed = bio.load_dictionary_tsv(args.seed_dict, src, tgt)
    config = preset(args.mode)
    for name in ("n_iter", "n_freq", "n_aug", "csls_k"):
        value = getattr(args, name)
        if value is not None:
            setattr(config, name, value)
    if args.supervised is not None:
        config.supervised = args.supervised
    for name in ("n_cl", "n_neg", "lr", "gamma", "tau", "refresh_interval"):
        value = getattr(args, name)
        if value is not None:
            setattr(config.train, name, value)
    config.__post_init__()
    config.train.__post_init__()

    maps, final_dict = run_c1(src, tgt, seed, config, threads=args.threads)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bio.write_binary(_matrix_embedding(maps.w_x), out / "w_x.bliv")
    bio.write_binary(_matrix_embedding(maps.w_y), out / "w_y.bliv")
    bio.write_binary(apply_map(src, maps.w_x, args.threads), out / "src_mapped.bliv")
    bio.write_binary(apply_map(tgt, maps.w_y, args.threads), out / "tgt_mapped.bliv")
    bio.write_dictionary_tsv(final_dict, src, tgt, out / "train_dict.tsv")
    log.info("wrote maps and mapped spaces to %s", out)
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    src = bio.read_embeddings(args.src_emb, args.max_vocab)
    tgt = bio.read_embeddings(args.tgt_emb, args.max_vocab)
    test = bio.load_dictionary_tsv(args.test_dict, src, tgt)
    sources = np.unique(test.src)
    queries = src.matrix[sources]
    k = min(args.depth, len(tgt))
    if args.measure == "csls":
        stats = compute_csls_stats(src, tgt, args.csls_k, threads=args.threads)
        ranked = csls_topk(queries, tgt, stats, k, threads=args.threads)
    else:
        ranked = nn_topk(queries, tgt, k, measure=args.measure, threads=args.threads)
    report = evaluate(test, rankings_from_matrix(ranked, sources))
    extra = {"measure": args.measure, "test_pairs": len(test)}
    sys.stdout.write(format_report(report, extra))
    if args.report:
        Path(args.report).write_text(format_report(report, extra), encoding="utf-8")
    if args.json:
        Path(args.json).write_text(report_json(report, extra), encoding="utf-8")
    return 0


def _cmd_fuse(args: argparse.Namespace) -> int:
    c1_src = bio.read_embeddings(args.c1_src)
    c1_tgt = bio.read_embeddings(args.c1_tgt)
    c2_src = bio.read_embeddings(args.c2_src)
    c2_tgt = bio.read_embeddings(args.c2_tgt)
    seed = bio.load_dictionary_tsv(args.seed_dict, c1_src, c1_tgt)
    fused_src, fused_tgt = fuse_spaces(
        c1_src, c1_tgt, c2_src, c2_tgt, seed, lam=args.lam, threads=args.threads
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bio.write_binary(fused_src, out / "fused_src.bliv")
    bio.write_binary(fused_tgt, out / "fused_tgt.bliv")
    log.info("wrote fused spaces to %s", out)
    return 0


def _cmd_export_candidates(args: argparse.Namespace) -> int:
    src = bio.read_embeddings(args.src_emb, args.max_vocab)
    tgt = bio.read_embeddings(args.tgt_emb, args.max_vocab)
    seed = bio.load_dictionary_tsv(args.seed_dict, src, tgt)
    pairs, scores = export_candidates(
        src, tgt, seed, args.n_freq, args.top_n, args.csls_k, threads=args.threads
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "candidates.tsv").open("w", encoding="utf-8") as fh:
        for (s, t), score in zip(pairs, scores):
            fh.write(f"{src.words[s]}\t{tgt.words[t]}\t{score:.6f}\n")

    train = seed.union(BilingualDictionary.from_pairs([(int(s), int(t)) for s, t in pairs]))
    pool = mine_hard_negatives(train, src, tgt, args.n_neg, threads=args.threads)
    with (out / "negatives.tsv").open("w", encoding="utf-8") as fh:
        for i, (s, t) in enumerate(train):
            x_words = " ".join(src.words[j] for j in pool.neg_x[i])
            y_words = " ".join(tgt.words[j] for j in pool.neg_y[i])
            fh.write(f"{src.words[s]}\t{tgt.words[t]}\t{x_words}\t{y_words}\n")
    log.info("wrote %d candidates and %d negative rows to %s", len(pairs), len(train), out)
    return 0


def _cmd_gen_synthetic(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(
        vocab_size=args.vocab_size,
        dim=args.dim,
        noise_sigma=args.noise_sigma,
        seed_pairs=args.seed_pairs,
        test_pairs=args.test_pairs,
        rng_seed=args.rng_seed,
        shuffle=args.shuffle,
    )
    paths = write_instance(spec, args.out_dir)
    log.info("wrote synthetic benchmark: %s", ", ".join(str(p) for p in paths.values()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blialign",
        description="Bilingual lexicon induction via contrastively tuned linear maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-c1", help="learn the first-stage maps from a seed dictionary")
    p.add_argument("--src-emb", required=True)
    p.add_argument("--tgt-emb", required=True)
    p.add_argument("--seed-dict", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mode", choices=("5k", "1k"), default="5k",
                   help="hyperparameter preset (default 5k)")
    p.add_argument("--max-vocab", type=int, default=200000)
    p.add_argument("--n-iter", type=int)
    p.add_argument("--n-cl", type=int)
    p.add_argument("--n-neg", type=int)
    p.add_argument("--n-freq", type=int)
    p.add_argument("--n-aug", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--refresh-interval", type=int)
    p.add_argument("--csls-k", type=int)
    p.add_argument("--supervised", action=argparse.BooleanOptionalAction, default=None,
                   help="fine-tune on the seed dictionary only (preset decides by default)")
    _add_common(p)
    p.set_defaults(func=_cmd_train_c1)

    p = sub.add_parser("evaluate", help="score a mapped space against a gold dictionary")
    p.add_argument("--src-emb", required=True, help="mapped source embeddings")
    p.add_argument("--tgt-emb", required=True, help="mapped target embeddings")
    p.add_argument("--test-dict", required=True)
    p.add_argument("--measure", choices=("csls", "cosine", "dot"), default="csls")
    p.add_argument("--csls-k", type=int, default=10)
    p.add_argument("--depth", type=int, default=10,
                   help="ranking depth for the reciprocal rank (default 10)")
    p.add_argument("--max-vocab", type=int, default=None)
    p.add_argument("--report", help="also write the key=value report to this file")
    p.add_argument("--json", help="also write a JSON report to this file")
    _add_common(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("fuse", help="fuse first-stage and second-stage spaces")
    p.add_argument("--c1-src", required=True)
    p.add_argument("--c1-tgt", required=True)
    p.add_argument("--c2-src", required=True)
    p.add_argument("--c2-tgt", required=True)
    p.add_argument("--seed-dict", required=True)
    p.add_argument("--lam", type=float, default=0.2, help="weight of the second space")
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser(
        "export-candidates",
        help="rank translation candidates and mine negatives for downstream training",
    )
    p.add_argument("--src-emb", required=True, help="mapped source embeddings")
    p.add_argument("--tgt-emb", required=True, help="mapped target embeddings")
    p.add_argument("--seed-dict", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-freq", type=int, default=20000)
    p.add_argument("--top-n", type=int, default=4000)
    p.add_argument("--n-neg", type=int, default=28)
    p.add_argument("--csls-k", type=int, default=10)
    p.add_argument("--max-vocab", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_export_candidates)

    p = sub.add_parser("gen-synthetic", help="write a synthetic benchmark with known answers")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--vocab-size", type=int, default=2000)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed-pairs", type=int, default=200)
    p.add_argument("--test-pairs", type=int, default=500)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--shuffle", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_gen_synthetic)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, OSError, TrainingDivergedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
