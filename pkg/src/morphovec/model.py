"""Embedding storage and the per-variant context-word composition."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Variant(str, Enum):
    """Training variant selecting how context words are composed."""

    CBOW = "cbow"
    EMWE = "emwe"
    MWE_A = "mwe-a"
    MWE_S = "mwe-s"
    MWE_M = "mwe-m"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(v.value for v in cls)
            raise ValueError(f"unknown variant {value!r} (choose from {choices})") from None


class EmbeddingMatrix:
    """Input and output vector tables for a vocabulary.

    input_vectors holds one row per word plus optional extra rows, used by
    the explicit-morpheme variant for its (kind, morpheme) vectors;
    output_vectors always has exactly one row per word.
    """

    def __init__(self, n_words, dim, extra_rows=0, dtype=np.float32):
        if n_words < 1 or dim < 1:
            raise ValueError("need n_words >= 1 and dim >= 1")
        self.n_words = n_words
        self.dim = dim
        self.input_vectors = np.zeros((n_words + extra_rows, dim), dtype=dtype)
        self.output_vectors = np.zeros((n_words, dim), dtype=dtype)

    @property
    def word_vectors(self):
        """Input vectors of the vocabulary words only (view, no copy)."""
        return self.input_vectors[: self.n_words]

    def randomize_inputs(self, rng):
        """word2vec-style init: inputs uniform in [-0.5/dim, 0.5/dim), outputs zero."""
        shape = self.input_vectors.shape
        self.input_vectors[:] = (rng.random(shape) - 0.5) / self.dim
        return self


class WordVectors:
    """Read-only word -> vector lookup used by the evaluation helpers."""

    def __init__(self, words, vectors):
        vectors = np.asarray(vectors)
        if len(words) != len(vectors):
            raise ValueError("words and vectors disagree in length")
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate words")
        self.vectors = vectors
        self._units = None

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def __getitem__(self, word):
        return self.vectors[self.index[word]]

    def get(self, word):
        i = self.index.get(word)
        return None if i is None else self.vectors[i]

    @property
    def dim(self):
        return self.vectors.shape[1]

    def unit_vectors(self):
        """Row-normalized copy (cached); zero rows are left at zero."""
        if self._units is None:
            units = np.asarray(self.vectors, dtype=np.float64).copy()
            norms = np.linalg.norm(units, axis=1)
            nonzero = norms > 0
            units[nonzero] /= norms[nonzero, None]
            self._units = units
        return self._units


@dataclass(frozen=True)
class Composition:
    """A composed context vector and the rows it was built from.

    value equals the sum of coefficient * input_vectors[row] over the
    constituents, which makes the backward pass a plain redistribution of
    the incoming gradient by the same coefficients.
    """

    constituents: tuple
    value: np.ndarray


def _constituents(variant, word_id, info):
    """(row, coefficient) pairs composing one context word.

    info carries the word's morpheme data: a WordMeanings entry for the
    implicit variants, a sequence of morpheme rows for EMWE, nothing for
    CBOW. Words without morpheme data keep coefficient 1 on themselves.
    """
    if variant is Variant.CBOW or info is None:
        return ((word_id, 1.0),)
    if variant is Variant.EMWE:
        rows = tuple(info)
        if not rows:
            return ((word_id, 1.0),)
        share = 0.5 / len(rows)
        return ((word_id, 0.5), *((r, share) for r in rows))
    union = info.union()
    if not union:
        return ((word_id, 1.0),)
    if variant is Variant.MWE_A:
        share = 0.5 / len(union)
        return ((word_id, 0.5), *((e.meaning_id, share) for e in union))
    # MWE-S and MWE-M: similarity weights, already normalized over the union
    return ((word_id, 0.5), *((e.meaning_id, 0.5 * e.weight) for e in union))


def compose_context_vector(variant, word_id, info, embeddings):
    """Compose the effective input vector of one context word.

    CBOW uses the word vector itself. The implicit variants average the word
    vector with its surviving morpheme-meaning vectors (equal shares for
    mwe-a, similarity weights for mwe-s, the per-kind best meanings for
    mwe-m, each at overall weight one half); EMWE averages with the matched
    morphemes' own vectors. info supplies the word's morpheme data as
    described in _constituents; pass the word-map entry for mwe-a/mwe-s and
    the max-set entry for mwe-m.
    """
    variant = Variant.parse(variant)
    if not 0 <= word_id < embeddings.n_words:
        raise ValueError(f"unknown word id {word_id}")
    cons = _constituents(variant, word_id, info)
    rows = np.array([r for r, _ in cons], dtype=np.int64)
    coeffs = np.array([c for _, c in cons], dtype=np.float64)
    value = coeffs @ embeddings.input_vectors[rows]
    return Composition(cons, value)


def gradient_coefficients(composition):
    """Backward mapping of a composition: a gradient g arriving at the
    composed vector contributes coefficient * g to each constituent row."""
    return composition.constituents


class CompositionTable:
    """All per-word constituents flattened into CSR arrays for training.

    grad_weights equals weights except when meaning/morpheme vectors are
    frozen, in which case their entries are zeroed so gradients only reach
    each context word's own row.
    """

    _ONES = np.ones(4096)

    def __init__(self, offsets, rows, weights, grad_weights, identity=False):
        self.offsets = offsets
        self.rows = rows
        self.weights = weights
        self.grad_weights = grad_weights
        self.is_identity = identity

    @classmethod
    def build(cls, variant, n_words, meanings=None, emwe_rows=None, freeze_meanings=False, dtype=np.float64):
        """Flatten constituents for every word id in [0, n_words).

        meanings: WordMorphemeMap or MaxMeaningSet for the implicit variants;
        emwe_rows: dict word id -> morpheme row tuple for EMWE. dtype should
        match the embedding matrix to keep the training loop promotion-free.
        """
        variant = Variant.parse(variant)
        rows, weights, grads = [], [], []
        offsets = np.zeros(n_words + 1, dtype=np.int64)
        for wid in range(n_words):
            if variant is Variant.EMWE:
                info = None if emwe_rows is None else emwe_rows.get(wid)
            elif variant is Variant.CBOW:
                info = None
            else:
                info = None if meanings is None else meanings.get(wid)
            for row, coeff in _constituents(variant, wid, info):
                rows.append(row)
                weights.append(coeff)
                grads.append(0.0 if freeze_meanings and row != wid else coeff)
            offsets[wid + 1] = len(rows)
        identity = variant is Variant.CBOW
        return cls(
            offsets,
            np.array(rows, dtype=np.int64),
            np.array(weights, dtype=dtype),
            np.array(grads, dtype=dtype),
            identity=identity,
        )

    @classmethod
    def identity(cls, n_words):
        """Plain CBOW table: every word composes to itself with coefficient 1."""
        return cls.build(Variant.CBOW, n_words)

    def gather(self, word_ids):
        """Concatenate the constituent (rows, weights, grad_weights) of word_ids."""
        if self.is_identity:
            n = len(word_ids)
            ones = self._ONES[:n] if n <= len(self._ONES) else np.ones(n)
            return np.asarray(word_ids), ones, ones
        starts = self.offsets[word_ids]
        counts = self.offsets[word_ids + 1] - starts
        total = int(counts.sum())
        idx = np.arange(total) + np.repeat(starts - (np.cumsum(counts) - counts), counts)
        return self.rows[idx], self.weights[idx], self.grad_weights[idx]
