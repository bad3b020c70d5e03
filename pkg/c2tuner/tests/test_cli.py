import numpy as np

from c2tuner import read_bliv
from c2tuner.cli import main

from conftest import negatives_for, word_pairs, write_negatives_tsv


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_build_dict_5k_passthrough(tmp_path, capsys):
    seed = write(tmp_path / "seed.tsv", "a\tx\nb\ty\n")
    out = tmp_path / "dict.tsv"
    assert main(["build-dict", "--seed-dict", seed, "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8") == "a\tx\nb\ty\n"


def test_build_dict_1k_union(tmp_path):
    seed = write(tmp_path / "seed.tsv", "a\tx\n")
    cands = write(tmp_path / "cand.tsv", "b\ty\t0.9\na\tx\t0.8\nc\tz\t0.7\n")
    out = tmp_path / "dict.tsv"
    code = main([
        "build-dict", "--seed-dict", seed, "--candidates", cands,
        "--mode", "1k", "--top-n", "2", "--out", str(out),
    ])
    assert code == 0
    assert out.read_text(encoding="utf-8") == "a\tx\nb\ty\n"


def test_build_dict_1k_without_candidates_fails(tmp_path, capsys):
    seed = write(tmp_path / "seed.tsv", "a\tx\n")
    code = main([
        "build-dict", "--seed-dict", seed, "--mode", "1k",
        "--out", str(tmp_path / "dict.tsv"),
    ])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_finetune_and_export_end_to_end(tmp_path, tiny_model_dir):
    pairs = word_pairs(6)
    seed = write(
        tmp_path / "seed.tsv", "".join(f"{s}\t{t}\n" for s, t in pairs)
    )
    negs = write_negatives_tsv(tmp_path / "negs.tsv", negatives_for(pairs, 2))
    model_out = tmp_path / "tuned"
    code = main([
        "finetune",
        "--model", tiny_model_dir,
        "--seed-dict", seed,
        "--negatives", str(negs),
        "--out-dir", str(model_out),
        "--epochs", "1", "--batch-size", "3", "--lr", "1e-3", "--n-neg", "2",
    ])
    assert code == 0
    assert (model_out / "config.json").exists()

    vocab = write(tmp_path / "vocab.txt", "".join(f"{s}\n" for s, _ in pairs))
    out_vec = tmp_path / "tuned.bliv"
    code = main([
        "export", "--model", str(model_out), "--vocab", vocab,
        "--out", str(out_vec),
    ])
    assert code == 0
    words, matrix = read_bliv(out_vec)
    assert words == [s for s, _ in pairs]
    assert matrix.shape == (6, 32)
    assert np.isfinite(matrix).all()


def test_finetune_zero_epochs_saves_model(tmp_path, tiny_model_dir):
    pairs = word_pairs(3)
    seed = write(tmp_path / "seed.tsv", "".join(f"{s}\t{t}\n" for s, t in pairs))
    negs = write_negatives_tsv(tmp_path / "negs.tsv", negatives_for(pairs, 1))
    model_out = tmp_path / "tuned"
    code = main([
        "finetune", "--model", tiny_model_dir, "--seed-dict", seed,
        "--negatives", str(negs), "--out-dir", str(model_out),
        "--epochs", "0", "--n-neg", "1",
    ])
    assert code == 0
    assert (model_out / "config.json").exists()


def test_finetune_missing_negatives_file(tmp_path, tiny_model_dir, capsys):
    seed = write(tmp_path / "seed.tsv", "a\tx\n")
    code = main([
        "finetune", "--model", tiny_model_dir, "--seed-dict", seed,
        "--negatives", str(tmp_path / "absent.tsv"),
        "--out-dir", str(tmp_path / "tuned"),
    ])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_export_empty_vocab_fails(tmp_path, tiny_model_dir, capsys):
    vocab = write(tmp_path / "vocab.txt", "\n")
    code = main([
        "export", "--model", tiny_model_dir, "--vocab", vocab,
        "--out", str(tmp_path / "v.bliv"),
    ])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_console_entry_point_registered():
    from importlib.metadata import entry_points

    eps = entry_points(group="console_scripts")
    names = {ep.name: ep.value for ep in eps}
    assert names.get("c2tuner") == "c2tuner.cli:main"
