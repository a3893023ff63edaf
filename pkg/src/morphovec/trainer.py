"""Negative-sampling SGD: noise table, per-window updates, two-phase pipeline."""

from __future__ import annotations

import os
import sys
import threading
import time
from dataclasses import dataclass, field, replace
from itertools import chain
from typing import Optional

import numpy as np

from .corpus import (
    DEFAULT_RULES,
    build_vocabulary,
    encode_sentences,
    iterate_windows,
    keep_probability_array,
    read_sentences,
    tokenize_line,
)
from .model import CompositionTable, EmbeddingMatrix, Variant, WordVectors
from .morphology import build_word_morpheme_map, segment_word, select_max_meanings

SIGMOID_SATURATION = 6.0
LR_FLOOR_RATIO = 1e-4
LR_UPDATE_TOKENS = 10_000


def sigmoid(x):
    """Logistic function, saturated outside +/-SIGMOID_SATURATION.

    Saturation bounds the activations away from 0 and 1 so that
    log(sigmoid) and log(1 - sigmoid) stay finite; inside the active range
    the value is exact.
    """
    x = np.minimum(np.maximum(x, -SIGMOID_SATURATION), SIGMOID_SATURATION)
    return 1.0 / (1.0 + np.exp(-x))


@dataclass
class TrainingConfig:
    """All knobs of a training run; defaults follow the reference setup
    (200 dimensions, window 5, 20 negatives, similarity threshold 0.4)."""

    variant: Variant = Variant.CBOW
    dim: int = 200
    window: int = 5
    negatives: int = 20
    epochs: int = 5
    lr0: float = 0.05
    subsample: Optional[float] = 1e-4  # None or 0 disables
    min_count: int = 5
    sim_threshold: float = 0.4
    seed: int = 1
    workers: int = 1
    pretrain_epochs: int = 1
    context_sum: bool = False
    freeze_meanings: bool = False
    dynamic_window: bool = True
    table_size: int = 10_000_000

    def __post_init__(self):
        self.variant = Variant.parse(self.variant)
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lr0 <= 0:
            raise ValueError("lr0 must be positive")
        if not -1.0 <= self.sim_threshold <= 1.0:
            raise ValueError("sim_threshold must lie in [-1, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.pretrain_epochs < 0:
            raise ValueError("pretrain_epochs must be >= 0")


class UnigramTable:
    """Noise distribution for negative sampling, flattened into an id array.

    Word w fills a share of the table proportional to count(w)**power, so
    uniform draws over slots follow the smoothed unigram distribution.
    """

    def __init__(self, vocab, power=0.75, size=10_000_000):
        if size < len(vocab):
            raise ValueError(
                f"table size {size} is smaller than the vocabulary ({len(vocab)} words)"
            )
        weights = np.asarray(vocab.counts, dtype=np.float64) ** power
        cum = np.cumsum(weights)
        cum /= cum[-1]
        slots = np.searchsorted(cum, np.arange(size) / size, side="right")
        self.table = np.minimum(slots, len(vocab) - 1).astype(np.int32)

    def __len__(self):
        return len(self.table)

    def draw(self, rng, n):
        return self.table[rng.integers(0, len(self.table), size=n)]


def draw_negatives(table, rng, count, target):
    """Draw negatives, redrawing collisions with the target (<= 100 rounds,
    stubborn collisions are dropped)."""
    negatives = table.draw(rng, count)
    for _ in range(100):
        mask = negatives == target
        if not mask.any():
            return negatives
        negatives[mask] = table.draw(rng, int(mask.sum()))
    return negatives[negatives != target]


def negative_sampling_loss(h, target_id, negative_ids, embeddings):
    """Loss of predicting target_id against the sampled negatives given the
    aggregated context vector h. Always finite and non-negative thanks to
    the saturated sigmoid."""
    out = embeddings.output_vectors
    loss = -np.log(sigmoid(float(out[target_id] @ h)))
    negative_ids = np.asarray(negative_ids, dtype=np.int64)
    if negative_ids.size:
        loss -= np.log1p(-sigmoid(out[negative_ids] @ h)).sum()
    return float(loss)


def sgd_step(window, config, embeddings, composition, lr, *, negatives=None, table=None, rng=None):
    """Apply one negative-sampling update for a training window.

    Composes every context word through the composition table, aggregates
    them into h (average by default, sum with config.context_sum), updates
    the output rows of the target and negatives, and redistributes the
    accumulated input gradient to every composition constituent scaled by
    its coefficient (and by 1/|context| in average mode, completing the
    chain rule). Negatives are drawn from table/rng unless given explicitly.

    Returns the window's loss at the pre-update parameters.
    """
    if negatives is None:
        negatives = draw_negatives(table, rng, config.negatives, window.target)
    W = embeddings.input_vectors
    Wout = embeddings.output_vectors
    context = np.asarray(window.context, dtype=np.int64)
    identity = composition.is_identity
    if identity:
        rows, grad_weights = context, None
        h = W[context].sum(axis=0)
    else:
        rows, weights, grad_weights = composition.gather(context)
        h = weights @ W[rows]
    scale = 1.0 if config.context_sum else 1.0 / len(context)
    if scale != 1.0:
        h = h * scale
    out_rows = np.empty(len(negatives) + 1, dtype=np.int64)
    out_rows[0] = window.target
    out_rows[1:] = negatives
    old_out = Wout[out_rows]  # fancy indexing copies: these stay pre-update
    activations = sigmoid(old_out @ h)
    loss = -(np.log(activations[0]) + np.log1p(-activations[1:]).sum())
    g = -activations
    g[0] += 1.0  # label minus predicted, times lr below
    g *= lr
    # duplicate rows must accumulate, but every row delta is a multiple of
    # the same vector, so summing coefficients per unique row is exact and
    # much faster than unbuffered scatter-adds
    out_list = out_rows.tolist()
    if len(set(out_list)) == len(out_list):
        Wout[out_rows] += g[:, None] * h
    else:
        unique_out, inverse = np.unique(out_rows, return_inverse=True)
        Wout[unique_out] += np.bincount(inverse, weights=g).astype(g.dtype)[:, None] * h
    e = g @ old_out
    row_list = rows.tolist()
    if len(set(row_list)) == len(row_list):
        if identity:
            W[rows] += scale * e
        else:
            W[rows] += (grad_weights * scale)[:, None] * e
    else:
        unique_in, inverse = np.unique(rows, return_inverse=True)
        if identity:
            coeff_sums = np.bincount(inverse) * scale
        else:
            coeff_sums = np.bincount(inverse, weights=grad_weights) * scale
        W[unique_in] += coeff_sums.astype(e.dtype)[:, None] * e
    return float(loss)


@dataclass
class _Progress:
    """Shared learning-rate schedule state (linear decay with a floor)."""

    lr0: float
    total: int
    processed: int = 0
    started: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def advance(self, n):
        with self.lock:
            self.processed += n

    def current_lr(self):
        frac = self.processed / (self.total + 1)
        return max(self.lr0 * LR_FLOOR_RATIO, self.lr0 * (1.0 - frac))

    def report(self, label, lr):
        elapsed = max(time.monotonic() - self.started, 1e-9)
        sys.stderr.write(
            f"\r{label}: lr {lr:.5f}  {self.processed:,}/{self.total:,} tokens  "
            f"{self.processed / elapsed:,.0f} tokens/s "
        )
        sys.stderr.flush()


@dataclass
class TrainResult:
    """Everything a training run produced."""

    vocab: object
    embeddings: EmbeddingMatrix
    config: TrainingConfig
    word_map: object = None
    max_meanings: object = None
    morpheme_index: Optional[dict] = None  # (kind, morpheme) -> extra input row
    morpheme_rows: Optional[dict] = None  # word id -> its morpheme rows
    pretrain_vectors: Optional[np.ndarray] = None
    epoch_losses: list = field(default_factory=list)
    tokens_per_epoch: int = 0
    phase_seconds: tuple = (0.0, 0.0)

    @property
    def word_vectors(self):
        return WordVectors(self.vocab.words, self.embeddings.word_vectors)


def _materialize(corpus, rules):
    """Corpus argument -> list of token sentences. Accepts a file path, an
    iterable of raw lines, or an iterable of pre-tokenized sentences."""
    if isinstance(corpus, (str, os.PathLike)):
        return list(read_sentences(corpus, rules))
    sentences = []
    for item in corpus:
        tokens = tokenize_line(item, rules) if isinstance(item, str) else list(item)
        if tokens:
            sentences.append(tokens)
    return sentences


def _emwe_rows(vocab, lexicon):
    """Assign an extra input row to every matched (kind, morpheme) pair."""
    segmentations = [segment_word(w, lexicon) for w in vocab.words]
    keys = sorted({pair for seg in segmentations for pair in seg.matched()})
    index = {key: len(vocab) + i for i, key in enumerate(keys)}
    word_rows = {}
    for wid, seg in enumerate(segmentations):
        matched = seg.matched()
        if matched:
            word_rows[wid] = tuple(index[pair] for pair in matched)
    return index, word_rows


def _split_shards(sentences, workers):
    if workers == 1:
        return [sentences]
    return [sentences[i::workers] for i in range(workers)]


def _train_shard(embeddings, composition, shard, config, table, rng, keep_prob, progress, report_label):
    loss_sum = 0.0
    n_windows = 0
    pending = 0
    lr = progress.current_lr()
    last_report = time.monotonic()
    for sentence in shard:
        pending += len(sentence)
        if pending >= LR_UPDATE_TOKENS:
            progress.advance(pending)
            pending = 0
            lr = progress.current_lr()
            if report_label and time.monotonic() - last_report > 1.0:
                progress.report(report_label, lr)
                last_report = time.monotonic()
        for window in iterate_windows(
            sentence, config.window, rng, keep_prob, config.dynamic_window
        ):
            loss_sum += sgd_step(
                window, config, embeddings, composition, lr, table=table, rng=rng
            )
            n_windows += 1
    progress.advance(pending)
    return loss_sum, n_windows


def _run_phase(label, epochs, embeddings, composition, shards, config, table, rngs, keep_prob, progress, losses, verbose):
    for epoch in range(epochs):
        shard_loss = [0.0] * len(shards)
        shard_windows = [0] * len(shards)

        def run(wid):
            shard_loss[wid], shard_windows[wid] = _train_shard(
                embeddings,
                composition,
                shards[wid],
                config,
                table,
                rngs[wid],
                keep_prob,
                progress,
                label if verbose and wid == 0 else None,
            )

        if len(shards) == 1:
            run(0)
        else:
            threads = [
                threading.Thread(target=run, args=(wid,), name=f"trainer-{wid}")
                for wid in range(len(shards))
            ]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        mean_loss = sum(shard_loss) / max(1, sum(shard_windows))
        losses.append(mean_loss)
        if verbose:
            sys.stderr.write(
                f"\r{label} epoch {epoch + 1}/{epochs}: mean loss {mean_loss:.4f}, "
                f"lr {progress.current_lr():.5f}\n"
            )


def train(corpus, config, lexicon=None, *, dtype=np.float32, progress=False, rules=DEFAULT_RULES):
    """Run the full two-phase pipeline and return a TrainResult.

    Phase 1 trains plain CBOW for config.pretrain_epochs. For the implicit
    variants, the word -> meanings map (and for mwe-m the per-kind max set)
    is then built from the phase-1 vectors and frozen; phase 2 continues
    training with the variant's composition for the remaining epochs. The
    cbow variant's phase 2 is the identity composition, so its output equals
    single-phase CBOW; EMWE skips map construction and composes with the
    matched morphemes' own vectors. The learning rate decays linearly over
    all processed tokens of both phases.
    """
    variant = config.variant
    if variant is not Variant.CBOW and lexicon is None:
        raise ValueError(f"variant {variant.value!r} requires a morpheme lexicon")
    sentences = _materialize(corpus, rules)
    vocab = build_vocabulary(chain.from_iterable(sentences), config.min_count)
    encoded = encode_sentences(sentences, vocab)
    del sentences
    if not encoded:
        raise ValueError("empty corpus")
    tokens_per_epoch = sum(len(s) for s in encoded)

    morpheme_index = morpheme_rows = None
    extra_rows = 0
    if variant is Variant.EMWE:
        morpheme_index, morpheme_rows = _emwe_rows(vocab, lexicon)
        extra_rows = len(morpheme_index)

    embeddings = EmbeddingMatrix(len(vocab), config.dim, extra_rows=extra_rows, dtype=dtype)
    embeddings.randomize_inputs(np.random.default_rng(config.seed))
    table = UnigramTable(vocab, size=config.table_size)
    keep_prob = keep_probability_array(vocab, config.subsample)
    shards = _split_shards(encoded, config.workers)
    rngs = [np.random.default_rng([config.seed, wid]) for wid in range(config.workers)]
    state = _Progress(lr0=config.lr0, total=tokens_per_epoch * config.epochs)

    pretrain_epochs = min(config.pretrain_epochs, config.epochs)
    identity = CompositionTable.identity(len(vocab))
    losses = []

    t0 = time.monotonic()
    _run_phase(
        "phase 1 (cbow pretrain)", pretrain_epochs, embeddings, identity,
        shards, config, table, rngs, keep_prob, state, losses, progress,
    )
    t1 = time.monotonic()

    word_map = max_meanings = None
    pretrain_vectors = None
    composition = identity
    if variant in (Variant.MWE_A, Variant.MWE_S, Variant.MWE_M):
        pretrain_vectors = embeddings.word_vectors.copy()
        word_map = build_word_morpheme_map(vocab, lexicon, embeddings, config.sim_threshold)
        source = word_map
        if variant is Variant.MWE_M:
            max_meanings = select_max_meanings(word_map)
            source = max_meanings
        composition = CompositionTable.build(
            variant, len(vocab), meanings=source,
            freeze_meanings=config.freeze_meanings, dtype=dtype,
        )
    elif variant is Variant.EMWE:
        composition = CompositionTable.build(
            variant, len(vocab), emwe_rows=morpheme_rows,
            freeze_meanings=config.freeze_meanings, dtype=dtype,
        )

    _run_phase(
        f"phase 2 ({variant.value})", config.epochs - pretrain_epochs, embeddings,
        composition, shards, config, table, rngs, keep_prob, state, losses, progress,
    )
    t2 = time.monotonic()

    return TrainResult(
        vocab=vocab,
        embeddings=embeddings,
        config=replace(config),
        word_map=word_map,
        max_meanings=max_meanings,
        morpheme_index=morpheme_index,
        morpheme_rows=morpheme_rows,
        pretrain_vectors=pretrain_vectors,
        epoch_losses=losses,
        tokens_per_epoch=tokens_per_epoch,
        phase_seconds=(t1 - t0, t2 - t1),
    )
