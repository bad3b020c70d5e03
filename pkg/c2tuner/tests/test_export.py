import numpy as np
import pytest
import torch

from c2tuner import encode_vocabulary, export_word_embeddings, read_bliv


def test_export_round_trip(encoder, tmp_path):
    vocab = [f"w{i}" for i in range(10)]
    path = tmp_path / "vecs.bliv"
    matrix = export_word_embeddings(encoder, vocab, path)
    words, got = read_bliv(path)
    assert words == vocab
    assert matrix.dtype == np.float32
    assert got.shape == (10, 32)
    np.testing.assert_array_equal(got, matrix)


def test_encode_vocabulary_matches_encoder(encoder):
    vocab = ["ab", "cd", "ef"]
    matrix = encode_vocabulary(encoder, vocab)
    encoder.model.eval()
    with torch.no_grad():
        direct = encoder.encode(vocab).numpy().astype(np.float32)
    np.testing.assert_allclose(matrix, direct, atol=1e-6)


def test_batch_size_does_not_change_vectors(encoder):
    vocab = [f"w{i}" for i in range(7)]
    a = encode_vocabulary(encoder, vocab, batch_size=2)
    b = encode_vocabulary(encoder, vocab, batch_size=100)
    np.testing.assert_allclose(a, b, atol=1e-4, rtol=1e-4)


def test_duplicate_words_rejected(encoder):
    with pytest.raises(ValueError, match="positions 0 and 2"):
        encode_vocabulary(encoder, ["dog", "cat", "dog"])


def test_empty_vocabulary_rejected(encoder):
    with pytest.raises(ValueError, match="empty"):
        encode_vocabulary(encoder, [])


def test_bad_batch_size_rejected(encoder):
    with pytest.raises(ValueError, match="batch_size"):
        encode_vocabulary(encoder, ["a"], batch_size=0)


def test_export_runs_in_eval_mode(encoder, tmp_path):
    encoder.model.train()
    export_word_embeddings(encoder, ["ab"], tmp_path / "v.bliv")
    assert not encoder.model.training
