"""Embedding persistence (interoperable text/binary formats) and run manifests."""

from __future__ import annotations

import numpy as np

from ._files import atomic_write_bytes, atomic_write_text
from .model import WordVectors

# bytes that may appear in the text format (ASCII floats + UTF-8 words);
# raw float32 records almost surely contain something else
_CONTROL = bytes(b for b in range(0x20) if b not in (0x09, 0x0A, 0x0D))


def save_embeddings(embeddings, words, path, fmt="text"):
    """Write word vectors with a `V D` header line.

    Text format: one `word v1 ... vD` line per word with 6-decimal values.
    Binary format: per word, the UTF-8 word, a space, D little-endian
    32-bit floats, and a newline.
    """
    matrix = np.asarray(getattr(embeddings, "word_vectors", embeddings))
    words = list(getattr(words, "words", words))
    if len(words) != len(matrix):
        raise ValueError(f"{len(words)} words but {len(matrix)} vector rows")
    header = f"{len(words)} {matrix.shape[1]}\n"
    if fmt == "text":
        lines = [header]
        for word, row in zip(words, matrix):
            lines.append(word + " " + " ".join(f"{x:.6f}" for x in row) + "\n")
        atomic_write_text(path, "".join(lines))
    elif fmt == "binary":
        chunks = [header.encode("utf-8")]
        for word, row in zip(words, matrix):
            chunks.append(word.encode("utf-8") + b" ")
            chunks.append(np.ascontiguousarray(row, dtype="<f4").tobytes())
            chunks.append(b"\n")
        atomic_write_bytes(path, b"".join(chunks))
    else:
        raise ValueError(f"unknown format {fmt!r} (use 'text' or 'binary')")


def load_embeddings(path):
    """Load a saved embedding file, auto-detecting text vs binary.

    Returns WordVectors (the word index plus float32 input vectors; output
    vectors are not persisted). Malformed headers, truncated bodies, row
    miscounts and duplicate words all raise ValueError.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    newline = data.find(b"\n")
    if newline < 0:
        raise ValueError(f"{path}: missing header line")
    try:
        n_words, dim = (int(x) for x in data[:newline].split())
    except ValueError:
        raise ValueError(f"{path}: malformed header {data[:newline]!r}") from None
    if n_words < 1 or dim < 1:
        raise ValueError(f"{path}: bad header counts {n_words} x {dim}")
    body = data[newline + 1 :]
    if any(b in _CONTROL for b in body[:4096]):
        words, matrix = _parse_binary(path, body, n_words, dim)
    else:
        words, matrix = _parse_text(path, body, n_words, dim)
    try:
        return WordVectors(words, matrix)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def _parse_text(path, body, n_words, dim):
    words = []
    matrix = np.empty((n_words, dim), dtype=np.float32)
    lines = body.decode("utf-8").splitlines()
    lines = [ln for ln in lines if ln.strip()]
    if len(lines) != n_words:
        raise ValueError(f"{path}: expected {n_words} rows, found {len(lines)}")
    for i, line in enumerate(lines):
        parts = line.split()
        if len(parts) != dim + 1:
            raise ValueError(
                f"{path}: row {i + 1}: expected {dim} values, found {len(parts) - 1}"
            )
        words.append(parts[0])
        try:
            matrix[i] = [float(x) for x in parts[1:]]
        except ValueError:
            raise ValueError(f"{path}: row {i + 1}: non-numeric value") from None
    return words, matrix


def _parse_binary(path, body, n_words, dim):
    words = []
    matrix = np.empty((n_words, dim), dtype=np.float32)
    record = 4 * dim
    pos = 0
    for i in range(n_words):
        space = body.find(b" ", pos)
        if space < 0 or space + record > len(body):
            raise ValueError(
                f"{path}: truncated at byte offset {pos}: expected {n_words} rows, read {i}"
            )
        try:
            words.append(body[pos:space].decode("utf-8"))
        except UnicodeDecodeError:
            raise ValueError(f"{path}: undecodable word at byte offset {pos}") from None
        matrix[i] = np.frombuffer(body, dtype="<f4", count=dim, offset=space + 1)
        pos = space + 1 + record
        if pos < len(body) and body[pos : pos + 1] == b"\n":
            pos += 1
    if body[pos:].strip(b"\n "):
        raise ValueError(f"{path}: trailing data after {n_words} rows (byte offset {pos})")
    return words, matrix


def write_manifest(path, entries):
    """Write a flat `key<TAB>value` manifest describing a run."""
    lines = [f"{key}\t{value}" for key, value in entries.items()]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_manifest(path):
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, value = line.partition("\t")
            entries[key] = value
    return entries
