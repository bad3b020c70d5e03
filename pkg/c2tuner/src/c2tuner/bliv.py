"""The binary embedding container consumed by the fusion stage.

Layout, little endian: magic b"BLIV", u32 version (1), u32 word count,
u32 dimension; per word a u32 byte length and UTF-8 bytes; then the
float32 row-major matrix. Kept byte-compatible with the aligner package
that reads these files; this module only needs to produce and verify them.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

MAGIC = b"BLIV"
VERSION = 1
_HEADER = struct.Struct("<4sIII")
_U32 = struct.Struct("<I")


class BlivFormatError(ValueError):
    pass


def write_bliv(words: Sequence[str], matrix: np.ndarray, path: str | Path) -> None:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != len(words):
        raise ValueError(
            f"matrix shape {matrix.shape} does not match {len(words)} words"
        )
    rows = np.ascontiguousarray(matrix, dtype=np.float32)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, len(words), rows.shape[1]))
        for word in words:
            raw = word.encode("utf-8")
            fh.write(_U32.pack(len(raw)))
            fh.write(raw)
        fh.write(rows.tobytes())


def read_bliv(path: str | Path) -> tuple[list[str], np.ndarray]:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise BlivFormatError(f"{path}: truncated header")
    magic, version, count, dim = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise BlivFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise BlivFormatError(f"{path}: unsupported version {version}")
    offset = _HEADER.size
    words = []
    for _ in range(count):
        if offset + 4 > len(blob):
            raise BlivFormatError(f"{path}: truncated at byte {offset}")
        (length,) = _U32.unpack_from(blob, offset)
        offset += 4
        if offset + length > len(blob):
            raise BlivFormatError(f"{path}: truncated at byte {offset}")
        words.append(blob[offset : offset + length].decode("utf-8"))
        offset += length
    need = count * dim * 4
    if len(blob) - offset < need:
        raise BlivFormatError(f"{path}: truncated matrix at byte {offset}")
    if len(blob) - offset > need:
        raise BlivFormatError(f"{path}: {len(blob) - offset - need} trailing bytes")
    matrix = np.frombuffer(blob, dtype="<f4", count=count * dim, offset=offset)
    return words, matrix.reshape(count, dim).copy()
