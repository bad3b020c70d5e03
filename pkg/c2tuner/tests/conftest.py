from pathlib import Path

import pytest
import torch

# Characters + continuation pieces are enough for WordPiece to split any
# lowercase ascii word; everything else falls to [UNK].
TINY_VOCAB = (
    ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    + list("abcdefghijklmnopqrstuvwxyz0123456789")
    + ["##" + c for c in "abcdefghijklmnopqrstuvwxyz0123456789"]
)


def build_tiny_encoder_dir(root: Path) -> Path:
    """A miniature randomly initialized encoder, constructed offline."""
    from transformers import BertConfig, BertModel, BertTokenizerFast

    (root / "vocab.txt").write_text("\n".join(TINY_VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast.from_pretrained(str(root))
    config = BertConfig(
        vocab_size=len(TINY_VOCAB),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=16,
    )
    torch.manual_seed(7)
    model = BertModel(config)
    model.save_pretrained(str(root))
    tokenizer.save_pretrained(str(root))
    return root


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> str:
    return str(build_tiny_encoder_dir(tmp_path_factory.mktemp("tinybert")))


@pytest.fixture()
def encoder(tiny_model_dir):
    from c2tuner import WordEncoder

    return WordEncoder.load(tiny_model_dir, max_seq_len=6)


def word_pairs(n: int, src_prefix: str = "s", tgt_prefix: str = "t"):
    return [(f"{src_prefix}{i}", f"{tgt_prefix}{i}") for i in range(n)]


def negatives_for(pairs, n_neg: int):
    """Cyclic fixed negatives: other words from the same side."""
    srcs = [s for s, _ in pairs]
    tgts = [t for _, t in pairs]
    table = {}
    for i, (s, t) in enumerate(pairs):
        src_negs = [srcs[(i + j + 1) % len(srcs)] for j in range(n_neg)]
        tgt_negs = [tgts[(i + j + 1) % len(tgts)] for j in range(n_neg)]
        table[(s, t)] = (src_negs, tgt_negs)
    return table


def write_negatives_tsv(path: Path, table) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for (s, t), (src_negs, tgt_negs) in table.items():
            fh.write(f"{s}\t{t}\t{' '.join(src_negs)}\t{' '.join(tgt_negs)}\n")
    return path
