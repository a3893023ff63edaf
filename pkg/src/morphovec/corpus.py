"""Corpus streaming: tokenization, vocabulary construction and training windows."""

from __future__ import annotations

import functools
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ._files import atomic_write_text


@dataclass(frozen=True)
class TokenFilterRules:
    """Token cleanup switches. Applying the rules twice equals applying once."""

    drop_numeric: bool = True
    strip_punctuation: bool = True
    lowercase: bool = True


DEFAULT_RULES = TokenFilterRules()


@functools.lru_cache(maxsize=8192)
def _is_punct(ch):
    return unicodedata.category(ch).startswith("P")


def tokenize_line(line, rules=DEFAULT_RULES):
    """Split a line on whitespace and clean each token.

    Cleanup order: strip punctuation (any Unicode punctuation at the token
    edges plus interior commas/periods), drop purely numeric tokens,
    lowercase. Tokens left empty are dropped, so "" yields [].
    """
    tokens = []
    for raw in line.split():
        tok = raw
        if rules.strip_punctuation:
            start, end = 0, len(tok)
            while start < end and _is_punct(tok[start]):
                start += 1
            while end > start and _is_punct(tok[end - 1]):
                end -= 1
            tok = tok[start:end]
            if "," in tok or "." in tok:
                tok = tok.replace(",", "").replace(".", "")
        if not tok:
            continue
        if rules.drop_numeric and tok.isnumeric():
            continue
        if rules.lowercase:
            tok = tok.lower()
        tokens.append(tok)
    return tokens


class Vocabulary:
    """Immutable word<->id mapping with corpus counts.

    Ids are dense in [0, len(vocab)) and assigned by descending count with
    ties broken lexicographically, so construction is deterministic.
    """

    def __init__(self, counts):
        items = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        self.words = [w for w, _ in items]
        self.counts = np.array([c for _, c in items], dtype=np.int64)
        self.index = {w: i for i, w in enumerate(self.words)}
        self.total_tokens = int(self.counts.sum()) if items else 0

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    @property
    def entries(self):
        return list(zip(self.words, self.counts.tolist()))

    def save(self, path):
        """Write one `word<TAB>count` line per entry, descending count."""
        lines = [f"{w}\t{c}" for w, c in zip(self.words, self.counts)]
        atomic_write_text(path, "\n".join(lines) + "\n")

    @classmethod
    def load(cls, path):
        counts = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    word, count = line.split("\t")
                    counts[word] = int(count)
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: expected 'word<TAB>count'"
                    ) from None
        if not counts:
            raise ValueError(f"{path}: empty vocabulary file")
        return cls(counts)


def build_vocabulary(tokens, min_count=5):
    """Count a token stream and keep words occurring at least min_count times."""
    counts = Counter(tokens)
    if not counts:
        raise ValueError("empty corpus")
    kept = {w: c for w, c in counts.items() if c >= min_count}
    if not kept:
        raise ValueError(f"no word appears at least {min_count} times")
    return Vocabulary(kept)


def subsample_keep_probability(word_count, total_tokens, threshold):
    """Probability of keeping one occurrence of a word before windowing.

    With corpus frequency f = word_count / total_tokens the word survives
    with probability min(1, (sqrt(f/threshold) + 1) * threshold / f): rare
    words (f <= threshold) are always kept, very frequent ones are thinned.
    """
    if threshold <= 0:
        raise ValueError("subsampling threshold must be positive")
    if word_count < 1 or total_tokens < word_count:
        raise ValueError("need 1 <= word_count <= total_tokens")
    f = word_count / total_tokens
    return min(1.0, (math.sqrt(f / threshold) + 1.0) * threshold / f)


def keep_probability_array(vocab, threshold):
    """Per-word-id keep probabilities, or None when subsampling is disabled."""
    if threshold is None or threshold == 0:
        return None
    if threshold < 0:
        raise ValueError("subsampling threshold must be positive")
    f = vocab.counts / vocab.total_tokens
    return np.minimum(1.0, (np.sqrt(f / threshold) + 1.0) * threshold / f)


@dataclass
class TrainingWindow:
    """A prediction task: the target word id and its context word ids."""

    target: int
    context: np.ndarray


def iterate_windows(sentence, window, rng, keep_prob=None, dynamic=True):
    """Yield TrainingWindows for one sentence of word ids.

    Positions are first thinned by the per-word keep probabilities (when
    given), then each surviving position i gets a context of b positions to
    either side, clipped at the sentence boundaries, where b is drawn
    uniformly from [1, window] (or fixed to window when dynamic is False).
    Windows with an empty context are skipped.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    sent = np.asarray(sentence, dtype=np.int64)
    if keep_prob is not None and len(sent):
        sent = sent[rng.random(len(sent)) < keep_prob[sent]]
    n = len(sent)
    if n < 2:
        return
    if dynamic:
        bs = rng.integers(1, window + 1, size=n)
    else:
        bs = np.full(n, window, dtype=np.int64)
    for i in range(n):
        b = bs[i]
        lo = 0 if b > i else i - b
        hi = min(n, i + b + 1)
        if hi - lo < 2:
            continue
        context = np.concatenate((sent[lo:i], sent[i + 1 : hi]))
        yield TrainingWindow(int(sent[i]), context)


def read_sentences(path, rules=DEFAULT_RULES):
    """Yield tokenized sentences from a one-sentence-per-line text file."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tokens = tokenize_line(line, rules)
            if tokens:
                yield tokens


def encode_sentences(sentences, vocab):
    """Map token sentences to int32 id arrays, dropping out-of-vocabulary tokens."""
    index = vocab.index
    encoded = []
    for sent in sentences:
        ids = [index[t] for t in sent if t in index]
        if ids:
            encoded.append(np.array(ids, dtype=np.int32))
    return encoded
