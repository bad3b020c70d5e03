"""Command-line front end: build-dict, finetune, export."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import C2Config, DEFAULT_MODEL
from .data import (
    DataFormatError,
    build_cl_dictionary,
    load_negatives_tsv,
    load_seed_tsv,
    load_vocab,
)
from .encoder import WordEncoder
from .export import export_word_embeddings
from .training import TrainingDivergedError, finetune

log = logging.getLogger(__name__)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--verbose", action="store_true", help="debug logging")


def _cmd_build_dict(args: argparse.Namespace) -> int:
    pairs = build_cl_dictionary(args.seed_dict, args.candidates, args.mode, args.top_n)
    with open(args.out, "w", encoding="utf-8") as fh:
        for s, t in pairs:
            fh.write(f"{s}\t{t}\n")
    log.info("wrote %d training pairs to %s", len(pairs), args.out)
    return 0


def _config_from_args(args: argparse.Namespace) -> C2Config:
    return C2Config(
        model_name=args.model,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        weight_decay=args.weight_decay,
        tau=args.tau,
        n_neg=args.n_neg,
        max_seq_len=args.max_seq_len,
        rng_seed=args.rng_seed,
        mixed_precision=args.mixed_precision,
    )


def _cmd_finetune(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    pairs = build_cl_dictionary(args.seed_dict, args.candidates, args.mode, args.top_n)
    negatives = load_negatives_tsv(args.negatives, config.n_neg)
    encoder = WordEncoder.load(config.model_name, config.max_seq_len, args.device)
    losses = finetune(encoder, pairs, negatives, config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    encoder.save(str(out))
    if losses:
        log.info(
            "finished %d steps: first loss %.6f, last loss %.6f; model saved to %s",
            len(losses), losses[0], losses[-1], out,
        )
    else:
        log.info("zero epochs requested; saved the model unchanged to %s", out)
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    encoder = WordEncoder.load(args.model, args.max_seq_len, args.device)
    vocab = load_vocab(args.vocab)
    export_word_embeddings(encoder, vocab, args.out, args.batch_size)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="c2tuner",
        description="Fine-tune a multilingual encoder on translation pairs and export word vectors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dict", help="assemble the training pair list")
    p.add_argument("--seed-dict", required=True)
    p.add_argument("--candidates", help="exported candidate TSV (required for 1k mode)")
    p.add_argument("--mode", choices=("5k", "1k"), default="5k")
    p.add_argument("--top-n", type=int, default=4000)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_build_dict)

    p = sub.add_parser("finetune", help="contrastively fine-tune the encoder")
    p.add_argument("--model", default=DEFAULT_MODEL)
    p.add_argument("--seed-dict", required=True)
    p.add_argument("--candidates")
    p.add_argument("--mode", choices=("5k", "1k"), default="5k")
    p.add_argument("--top-n", type=int, default=4000)
    p.add_argument("--negatives", required=True, help="fixed negatives TSV")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--lr", type=float, default=2e-5)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--n-neg", type=int, default=28)
    p.add_argument("--max-seq-len", type=int, default=6)
    p.add_argument("--rng-seed", type=int, default=33)
    p.add_argument("--mixed-precision", action="store_true")
    p.add_argument("--device")
    _add_common(p)
    p.set_defaults(fn=_cmd_finetune)

    p = sub.add_parser("export", help="encode a vocabulary list to a BLIV file")
    p.add_argument("--model", required=True)
    p.add_argument("--vocab", required=True, help="one word per line, UTF-8")
    p.add_argument("--out", required=True)
    p.add_argument("--max-seq-len", type=int, default=6)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--device")
    _add_common(p)
    p.set_defaults(fn=_cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except (ValueError, OSError, TrainingDivergedError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
