"""Morpheme lexicon, longest-match segmentation and the word -> meanings map."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from ._files import atomic_write_text

KINDS = ("prefix", "root", "suffix")


@dataclass
class MorphemeLexicon:
    """prefix/root/suffix morphemes, each mapped to its meaning words.

    Treated as immutable after loading; the sorted matcher lists are cached
    on first segmentation.
    """

    prefixes: dict
    roots: dict
    suffixes: dict

    def by_kind(self, kind):
        return {"prefix": self.prefixes, "root": self.roots, "suffix": self.suffixes}[kind]

    def __len__(self):
        return len(self.prefixes) + len(self.roots) + len(self.suffixes)

    @cached_property
    def _sorted_morphemes(self):
        # longest first so the first match wins; lexicographic within a length
        return {
            kind: tuple(sorted(self.by_kind(kind), key=lambda m: (-len(m), m)))
            for kind in KINDS
        }


def load_lexicon(path):
    """Parse a lexicon TSV: `type<TAB>morpheme<TAB>meaning1,meaning2,...`.

    type is one of prefix/root/suffix, `#` lines are comments, repeated
    (type, morpheme) lines merge their meanings. Morphemes and meanings are
    lowercased; multi-word meanings are split into individual words.
    """
    tables = {kind: {} for kind in KINDS}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(
                    f"{path}:{lineno}: expected 'type<TAB>morpheme<TAB>meanings'"
                )
            kind, morpheme, meanings_field = (p.strip().lower() for p in parts)
            if kind not in KINDS:
                raise ValueError(f"{path}:{lineno}: unknown morpheme type {kind!r}")
            if not morpheme:
                raise ValueError(f"{path}:{lineno}: empty morpheme")
            meanings = []
            for chunk in meanings_field.split(","):
                meanings.extend(chunk.split())
            if not meanings:
                raise ValueError(f"{path}:{lineno}: no meanings given")
            merged = tables[kind].setdefault(morpheme, [])
            for m in meanings:
                if m not in merged:
                    merged.append(m)
    return MorphemeLexicon(tables["prefix"], tables["root"], tables["suffix"])


@dataclass(frozen=True)
class MorphemeSegmentation:
    """The longest matching prefix/root/suffix of a word, each optional."""

    prefix: Optional[str] = None
    root: Optional[str] = None
    suffix: Optional[str] = None

    def matched(self):
        """(kind, morpheme) pairs for the slots that matched."""
        return tuple(
            (kind, m)
            for kind, m in (("prefix", self.prefix), ("root", self.root), ("suffix", self.suffix))
            if m is not None
        )


def segment_word(word, lexicon):
    """Longest-match segmentation of a word against the lexicon.

    The prefix is anchored at the word start, the suffix at the end, and the
    root may occur anywhere (leftmost occurrence on length ties). A morpheme
    spanning the whole word is allowed to match.
    """
    morphemes = lexicon._sorted_morphemes
    prefix = next((m for m in morphemes["prefix"] if word.startswith(m)), None)
    suffix = next((m for m in morphemes["suffix"] if word.endswith(m)), None)
    root = None
    best_pos = -1
    for m in morphemes["root"]:
        if root is not None and len(m) < len(root):
            break
        pos = word.find(m)
        if pos >= 0 and (root is None or pos < best_pos):
            root, best_pos = m, pos
    return MorphemeSegmentation(prefix, root, suffix)


class MeaningEntry(NamedTuple):
    """One surviving morpheme meaning of a word."""

    meaning_id: int
    weight: float
    cosine: float


@dataclass(frozen=True)
class WordMeanings:
    """The surviving meanings of one word, split by morpheme kind.

    Each kind's tuple is ordered best-cosine-first (lexicographic word
    tie-break), and weights are the similarity shares normalized over the
    union of distinct meanings, so they sum to 1.
    """

    prefix: tuple = ()
    root: tuple = ()
    suffix: tuple = ()

    def by_kind(self, kind):
        return {"prefix": self.prefix, "root": self.root, "suffix": self.suffix}[kind]

    def union(self):
        """Distinct meanings in prefix -> root -> suffix order."""
        seen = set()
        out = []
        for entry in self.prefix + self.root + self.suffix:
            if entry.meaning_id not in seen:
                seen.add(entry.meaning_id)
                out.append(entry)
        return tuple(out)

    @property
    def n_meanings(self):
        return len(self.union())


class WordMorphemeMap:
    """Per-word surviving morpheme meanings with frozen similarity weights."""

    def __init__(self, entries, sim_threshold):
        self.entries = entries
        self.sim_threshold = sim_threshold

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word_id):
        return word_id in self.entries

    def __getitem__(self, word_id):
        return self.entries[word_id]

    def get(self, word_id):
        return self.entries.get(word_id)

    def items(self):
        return self.entries.items()


class MaxMeaningSet(WordMorphemeMap):
    """Restriction of a WordMorphemeMap to the best meaning per morpheme kind."""


def _input_matrix(pretrained):
    return np.asarray(getattr(pretrained, "input_vectors", pretrained), dtype=np.float64)


def build_word_morpheme_map(vocab, lexicon, pretrained, sim_threshold):
    """Build the word -> morpheme-meanings map from pretrained vectors.

    For every vocabulary word: segment it, expand each matched morpheme into
    its meaning words, drop meanings that are out of vocabulary or whose
    cosine to the word is not strictly greater than sim_threshold, and weight
    the union of survivors by their normalized cosines. Words with no
    survivors get no entry.
    """
    if not -1.0 <= sim_threshold <= 1.0:
        raise ValueError("similarity threshold must lie in [-1, 1]")
    vectors = _input_matrix(pretrained)
    norms = np.linalg.norm(vectors, axis=1)
    entries = {}
    for wid, word in enumerate(vocab.words):
        segmentation = segment_word(word, lexicon)
        per_kind = {}
        for kind, morpheme in segmentation.matched():
            candidates = []
            for meaning in lexicon.by_kind(kind)[morpheme]:
                mid = vocab.index.get(meaning)
                if mid is None:
                    continue
                denom = norms[wid] * norms[mid]
                if denom == 0:
                    continue
                cos = float(np.clip(vectors[wid] @ vectors[mid] / denom, -1.0, 1.0))
                if cos > sim_threshold:
                    candidates.append((mid, cos))
            if candidates:
                candidates.sort(key=lambda mc: (-mc[1], vocab.words[mc[0]]))
                per_kind[kind] = candidates
        if not per_kind:
            continue
        entry = _weighted_entry(per_kind)
        if entry is not None:
            entries[wid] = entry
    return WordMorphemeMap(entries, sim_threshold)


def _weighted_entry(per_kind):
    """Normalize cosines over the union of distinct meanings (may span kinds)."""
    cosines = {}
    for kind in KINDS:
        for mid, cos in per_kind.get(kind, ()):
            cosines.setdefault(mid, cos)
    total = sum(cosines.values())
    if total <= 0:
        # only reachable with a non-positive threshold letting negatives in
        return None
    weights = {mid: cos / total for mid, cos in cosines.items()}
    kind_tuples = {
        kind: tuple(
            MeaningEntry(mid, weights[mid], cos) for mid, cos in per_kind.get(kind, ())
        )
        for kind in KINDS
    }
    return WordMeanings(kind_tuples["prefix"], kind_tuples["root"], kind_tuples["suffix"])


def select_max_meanings(word_map):
    """Keep only the highest-cosine meaning of each morpheme kind per word.

    The kept meanings' weights are renormalized over the restricted union,
    the same way the full map's weights were computed.
    """
    entries = {}
    for wid, meanings in word_map.items():
        per_kind = {}
        for kind in KINDS:
            kind_entries = meanings.by_kind(kind)
            if kind_entries:
                best = kind_entries[0]  # tuples are ordered best-first
                per_kind[kind] = [(best.meaning_id, best.cosine)]
        entry = _weighted_entry(per_kind)
        if entry is not None:
            entries[wid] = entry
    return MaxMeaningSet(entries, word_map.sim_threshold)


def save_word_map(word_map, vocab, path):
    """Export the map as TSV: `word<TAB>P:m:w,...<TAB>R:...<TAB>S:...`.

    Meanings are written as word:weight with weights to 6 decimals, in the
    stored best-first order; empty kinds keep their bare marker.
    """
    lines = []
    for wid in sorted(word_map.entries):
        meanings = word_map.entries[wid]
        fields = [vocab.words[wid]]
        for kind, marker in (("prefix", "P"), ("root", "R"), ("suffix", "S")):
            parts = ",".join(
                f"{vocab.words[e.meaning_id]}:{e.weight:.6f}" for e in meanings.by_kind(kind)
            )
            fields.append(f"{marker}:{parts}")
        lines.append("\t".join(fields))
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
