"""Reading and writing embeddings and dictionaries.

Text embeddings follow the common word2vec/fastText layout: an optional
"<count> <dim>" header line, then one word followed by its vector components
per line, space separated, UTF-8.

The binary embedding format is little-endian throughout:

    bytes 0-3    magic b"BLIV"
    bytes 4-7    u32 format version (currently 1)
    bytes 8-11   u32 vocabulary size
    bytes 12-15  u32 embedding dimension
    per word     u32 byte length, then that many UTF-8 bytes
    payload      vocab x dim float32 matrix, row-major

Dictionaries are TSV with one "src_word<TAB>tgt_word" pair per line.
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path

import numpy as np

from .data import BilingualDictionary, PairOrigin, VocabEmbedding

log = logging.getLogger(__name__)

MAGIC = b"BLIV"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sIII")
_U32 = struct.Struct("<I")


class EmbeddingFormatError(ValueError):
    """A text embedding file violates the expected layout."""


class BinaryFormatError(ValueError):
    """A binary embedding file is corrupt or not in this format."""


class DictionaryFormatError(ValueError):
    """A dictionary file yields no usable pairs."""


def load_embeddings_text(path: str | Path, max_vocab: int | None = None) -> VocabEmbedding:
    """Load word2vec/fastText-style text embeddings.

    The dimension is inferred from the first vector line and enforced on
    every later line. Duplicate words keep their first occurrence. Rows whose
    components fail to parse as floats are skipped with a warning; lines with
    the wrong token count and all-zero vectors are fatal.
    """
    path = Path(path)
    words: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dim: int | None = None
    header_dim: int | None = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.rstrip("\r\n").split(" ")
            tokens = [t for t in tokens if t]
            if not tokens:
                continue
            if lineno == 1 and len(tokens) == 2 and _all_ints(tokens):
                header_dim = int(tokens[1])
                continue
            word, comps = tokens[0], tokens[1:]
            if dim is None:
                if len(comps) < 1:
                    raise EmbeddingFormatError(f"{path}:{lineno}: no vector components")
                dim = len(comps)
                if header_dim is not None and header_dim != dim:
                    raise EmbeddingFormatError(
                        f"{path}: header dimension {header_dim} but first vector has {dim}"
                    )
            if len(comps) != dim:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim} components, got {len(comps)}"
                )
            if max_vocab is not None and len(words) >= max_vocab:
                break
            if word in seen:
                continue
            try:
                vec = np.array(comps, dtype=np.float64)
            except ValueError:
                log.warning("%s:%d: malformed float, skipping row for %r", path, lineno, word)
                continue
            if not vec.any():
                raise EmbeddingFormatError(f"{path}:{lineno}: zero vector for word {word!r}")
            seen.add(word)
            words.append(word)
            rows.append(vec)
    if not words:
        raise EmbeddingFormatError(f"{path}: no embedding rows found")
    return VocabEmbedding(words, np.array(rows))


def _all_ints(tokens: list[str]) -> bool:
    try:
        for t in tokens:
            int(t)
    except ValueError:
        return False
    return True


def write_embeddings_text(emb: VocabEmbedding, path: str | Path, header: bool = True) -> None:
    """Write text embeddings, with the "<count> <dim>" header by default."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{len(emb)} {emb.dim}\n")
        for word, row in zip(emb.words, emb.matrix):
            fh.write(word + " " + " ".join(repr(float(v)) for v in row) + "\n")


def write_binary(emb: VocabEmbedding, path: str | Path) -> None:
    """Write embeddings in the binary format described in the module docstring."""
    path = Path(path)
    chunks = [_HEADER.pack(MAGIC, BINARY_VERSION, len(emb), emb.dim)]
    for word in emb.words:
        raw = word.encode("utf-8")
        chunks.append(_U32.pack(len(raw)))
        chunks.append(raw)
    chunks.append(np.ascontiguousarray(emb.matrix, dtype="<f4").tobytes())
    path.write_bytes(b"".join(chunks))


def read_binary(path: str | Path) -> VocabEmbedding:
    """Read embeddings written by write_binary.

    Wrong magic or version, non-UTF-8 word bytes, truncation, and trailing
    garbage are all fatal; truncation errors report the byte offset.
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise BinaryFormatError(f"{path}: truncated header at byte offset {len(data)}")
    magic, version, count, dim = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BinaryFormatError(f"{path}: bad magic {magic!r}, not a binary embedding file")
    if version != BINARY_VERSION:
        raise BinaryFormatError(f"{path}: unsupported format version {version}")
    offset = _HEADER.size
    words: list[str] = []
    for i in range(count):
        if offset + _U32.size > len(data):
            raise BinaryFormatError(f"{path}: truncated word table at byte offset {offset}")
        (nbytes,) = _U32.unpack_from(data, offset)
        offset += _U32.size
        if offset + nbytes > len(data):
            raise BinaryFormatError(f"{path}: truncated word {i} at byte offset {offset}")
        try:
            words.append(data[offset : offset + nbytes].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise BinaryFormatError(f"{path}: word {i} is not valid UTF-8: {exc}") from exc
        offset += nbytes
    payload = count * dim * 4
    if offset + payload > len(data):
        raise BinaryFormatError(
            f"{path}: truncated matrix payload at byte offset {len(data)}, "
            f"expected {offset + payload} bytes"
        )
    if offset + payload < len(data):
        raise BinaryFormatError(f"{path}: trailing data at byte offset {offset + payload}")
    matrix = np.frombuffer(data, dtype="<f4", count=count * dim, offset=offset)
    return VocabEmbedding(words, matrix.reshape(count, dim))


def read_embeddings(path: str | Path, max_vocab: int | None = None) -> VocabEmbedding:
    """Load embeddings from either format, sniffing the binary magic."""
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        emb = read_binary(path)
        if max_vocab is not None and len(emb) > max_vocab:
            emb = emb.head(max_vocab)
        return emb
    return load_embeddings_text(path, max_vocab=max_vocab)


def load_dictionary_tsv(
    path: str | Path, src: VocabEmbedding, tgt: VocabEmbedding
) -> BilingualDictionary:
    """Load a word-pair TSV, resolving words to indices in the given vocabs.

    Pairs with an out-of-vocabulary word are dropped and counted. Malformed
    lines are skipped with a warning. Duplicate pairs collapse to their first
    occurrence. An empty result is an error.
    """
    path = Path(path)
    src_index = src.word_index
    tgt_index = tgt.word_index
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    oov = 0
    dups = 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not fields[0] or not fields[1]:
                log.warning("%s:%d: expected 'src<TAB>tgt', skipping line", path, lineno)
                continue
            si = src_index.get(fields[0])
            ti = tgt_index.get(fields[1])
            if si is None or ti is None:
                oov += 1
                continue
            if (si, ti) in seen:
                dups += 1
                continue
            seen.add((si, ti))
            pairs.append((si, ti))
    if not pairs:
        raise DictionaryFormatError(f"{path}: no usable pairs (dropped {oov} out-of-vocabulary)")
    log.info(
        "%s: loaded %d pairs (%d out-of-vocabulary dropped, %d duplicates collapsed)",
        path,
        len(pairs),
        oov,
        dups,
    )
    return BilingualDictionary.from_pairs(pairs, PairOrigin.SEED)


def write_dictionary_tsv(
    dictionary: BilingualDictionary,
    src: VocabEmbedding,
    tgt: VocabEmbedding,
    path: str | Path,
) -> None:
    """Write dictionary pairs as word TSV in their stored order."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for s, t in dictionary:
            fh.write(f"{src.words[s]}\t{tgt.words[t]}\n")
