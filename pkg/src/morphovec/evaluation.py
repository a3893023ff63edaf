"""Intrinsic evaluation: word similarity, syntactic analogy, neighbors, PCA, sweeps."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .corpus import DEFAULT_RULES
from .trainer import _materialize, train


def cosine(u, v):
    """Cosine similarity, clamped to [-1, 1] against rounding.

    Raises ValueError for zero-norm inputs, where the value is undefined.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("undefined cosine: zero vector")
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def _fractional_ranks(values):
    """Average ranks (1-based); tied values share the mean of their positions."""
    values = np.asarray(values, dtype=np.float64)
    _, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    before = np.cumsum(counts) - counts
    return before[inverse] + (counts[inverse] + 1) / 2.0


def spearman_rho(model_scores, human_scores):
    """Spearman rank correlation: Pearson correlation of fractional ranks."""
    if len(model_scores) != len(human_scores):
        raise ValueError("score lists differ in length")
    if len(model_scores) < 2:
        raise ValueError("need at least 2 score pairs")
    rx = _fractional_ranks(model_scores)
    ry = _fractional_ranks(human_scores)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    vx = dx @ dx
    vy = dy @ dy
    if vx == 0.0 or vy == 0.0:
        raise ValueError("rank variance is zero (all scores tie)")
    return float(np.clip(dx @ dy / np.sqrt(vx * vy), -1.0, 1.0))


@dataclass
class SimilarityDataset:
    """Human-scored word pairs."""

    name: str
    pairs: list  # (word1, word2, human score)

    def __len__(self):
        return len(self.pairs)


@dataclass
class AnalogyDataset:
    """a:b :: c:d questions."""

    name: str
    questions: list  # (a, b, c, d)

    def __len__(self):
        return len(self.questions)


@dataclass
class EvalReport:
    """One evaluation outcome: metric value (percent), coverage, skips."""

    dataset: str
    metric: str  # "spearman" or "accuracy"
    value: float
    covered: int
    skipped: int

    def tsv_row(self):
        return f"{self.dataset}\t{self.metric}\t{self.value:.2f}\t{self.covered}\t{self.skipped}"


def load_similarity_dataset(path, name=None):
    """Parse `word1 <sep> word2 <sep> score` lines, tab- or comma-separated,
    with an optional header line. Words are lowercased."""
    path = Path(path)
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            sep = "\t" if "\t" in line else ","
            parts = [p.strip() for p in line.split(sep)]
            if len(parts) < 3:
                raise ValueError(f"{path}:{lineno}: expected 'word1{sep}word2{sep}score'")
            try:
                score = float(parts[2])
            except ValueError:
                if lineno == 1 and not pairs:
                    continue  # header line
                raise ValueError(f"{path}:{lineno}: non-numeric score {parts[2]!r}") from None
            pairs.append((parts[0].lower(), parts[1].lower(), score))
    if not pairs:
        raise ValueError(f"{path}: no word pairs found")
    return SimilarityDataset(name or path.stem, pairs)


def load_analogy_dataset(path, name=None):
    """Parse whitespace-separated `a b c d` questions; lines starting with
    `:` are section headers and ignored (scores cover the whole file)."""
    path = Path(path)
    questions = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith(":"):
                continue
            words = [w.lower() for w in line.split()]
            if len(words) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 words, got {len(words)}")
            if len(set(words)) != 4:
                raise ValueError(f"{path}:{lineno}: question words must be distinct")
            questions.append(tuple(words))
    if not questions:
        raise ValueError(f"{path}: no questions found")
    return AnalogyDataset(name or path.stem, questions)


def eval_word_similarity(vectors, dataset):
    """Spearman correlation (as a percentage) between cosine scores and human
    scores; pairs with an out-of-vocabulary word are skipped and counted."""
    model_scores = []
    human_scores = []
    skipped = 0
    for w1, w2, human in dataset.pairs:
        if w1 in vectors and w2 in vectors:
            model_scores.append(cosine(vectors[w1], vectors[w2]))
            human_scores.append(human)
        else:
            skipped += 1
    if len(model_scores) < 2:
        raise ValueError(
            f"{dataset.name}: only {len(model_scores)} pairs covered by the vocabulary"
        )
    rho = spearman_rho(model_scores, human_scores)
    return EvalReport(dataset.name, "spearman", rho * 100.0, len(model_scores), skipped)


def eval_analogy(vectors, dataset, exclude_inputs=True, chunk_size=256):
    """Answer a:b :: c:? by the cosine argmax to (v_b - v_a + v_c).

    The three query words are excluded from the candidates unless
    exclude_inputs is False. Questions with any out-of-vocabulary word are
    skipped and counted; accuracy is reported as a percentage of the rest.
    """
    units = vectors.unit_vectors()
    raw = np.asarray(vectors.vectors, dtype=np.float64)
    ids = []
    skipped = 0
    for question in dataset.questions:
        try:
            ids.append([vectors.index[w] for w in question])
        except KeyError:
            skipped += 1
    correct = 0
    for start in range(0, len(ids), chunk_size):
        block = np.asarray(ids[start : start + chunk_size], dtype=np.int64)
        targets = raw[block[:, 1]] - raw[block[:, 0]] + raw[block[:, 2]]
        norms = np.linalg.norm(targets, axis=1)
        safe = norms > 0
        targets[safe] /= norms[safe, None]
        scores = units @ targets.T  # vocab x block
        if exclude_inputs:
            for col in range(block.shape[0]):
                scores[block[col, :3], col] = -np.inf
        predictions = np.argmax(scores, axis=0)
        correct += int(np.sum(safe & (predictions == block[:, 3])))
    covered = len(ids)
    accuracy = 100.0 * correct / covered if covered else 0.0
    return EvalReport(dataset.name, "accuracy", accuracy, covered, skipped)


def n_nearest(vectors, word, n):
    """Top n neighbors by cosine, excluding the query word; ties break
    lexicographically. Raises for out-of-vocabulary queries."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if word not in vectors:
        raise ValueError(f"word {word!r} not in vocabulary")
    units = vectors.unit_vectors()
    qid = vectors.index[word]
    qnorm = np.linalg.norm(np.asarray(vectors.vectors[qid], dtype=np.float64))
    if qnorm == 0.0:
        raise ValueError("undefined cosine: zero vector")
    scores = units @ units[qid]
    order = np.argsort(-scores, kind="stable")
    order = order[order != qid]
    cut = min(n, len(order))
    if cut == 0:
        return []
    # widen past the cut to catch score ties, then settle them by word
    threshold = scores[order[cut - 1]]
    pool = [i for i in order if scores[i] >= threshold]
    pool.sort(key=lambda i: (-scores[i], vectors.words[i]))
    return [(vectors.words[i], float(np.clip(scores[i], -1.0, 1.0))) for i in pool[:cut]]


def _power_iteration(matrix, start, tol=1e-13, max_iter=10_000, orthogonal_to=None):
    v = start / np.linalg.norm(start)
    for _ in range(max_iter):
        w = matrix @ v
        if orthogonal_to is not None:
            w -= (w @ orthogonal_to) * orthogonal_to
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, v
        w /= norm
        if np.linalg.norm(w - v) < tol or np.linalg.norm(w + v) < tol:
            v = w
            break
        v = w
    return float(v @ matrix @ v), v


def pca_project(vectors, words):
    """Project selected words onto their top-2 principal directions.

    Centers the selected rows, extracts the two leading eigenvectors of
    their covariance by power iteration with deflation, and fixes signs so
    each component's first non-zero loading is positive. Raises when fewer
    than 3 words are given, any is out of vocabulary, or the selection has
    rank < 2 (e.g. collinear points).
    """
    words = list(words)
    if len(words) < 3:
        raise ValueError("need at least 3 words to project")
    missing = [w for w in words if w not in vectors]
    if missing:
        raise ValueError(f"words not in vocabulary: {', '.join(missing)}")
    X = np.asarray(
        [np.asarray(vectors[w], dtype=np.float64) for w in words], dtype=np.float64
    )
    X -= X.mean(axis=0)
    cov = X.T @ X / (len(words) - 1)
    start = np.random.default_rng(0).standard_normal(cov.shape[0])
    lam1, v1 = _power_iteration(cov, start)
    deflated = cov - lam1 * np.outer(v1, v1)
    lam2, v2 = _power_iteration(deflated, start, orthogonal_to=v1)
    if lam1 <= 0.0 or lam2 <= max(lam1, 1.0) * 1e-9:
        raise ValueError("selected words span fewer than 2 dimensions")
    components = []
    for v in (v1, v2):
        nonzero = np.nonzero(np.abs(v) > 1e-12)[0]
        if len(nonzero) and v[nonzero[0]] < 0:
            v = -v
        components.append(v)
    coords = X @ np.column_stack(components)
    return [(w, float(x), float(y)) for w, (x, y) in zip(words, coords)]


@dataclass
class SweepCell:
    """One sweep measurement: the axis value and its per-dataset reports."""

    axis: str
    value: float
    reports: dict  # dataset name -> EvalReport
    error: Optional[str] = None


def _truncate_by_tokens(sentences, fraction):
    if not 0.0 < fraction <= 1.0:
        raise ValueError("token fraction must lie in (0, 1]")
    total = sum(len(s) for s in sentences)
    budget = max(1, int(round(fraction * total)))
    kept = []
    for sent in sentences:
        if budget <= 0:
            break
        kept.append(sent[:budget] if len(sent) > budget else sent)
        budget -= len(kept[-1])
    return kept


def run_sweep(corpus, config, axis, values, datasets, lexicon=None, *, dtype=np.float32, progress=False):
    """Train and evaluate one model per axis value.

    axis "token_fraction" truncates the corpus to a token budget before
    training; axis "window" overrides the context window size. Failures are
    recorded per cell and the sweep continues.
    """
    if axis not in ("token_fraction", "window"):
        raise ValueError("axis must be 'token_fraction' or 'window'")
    if not values:
        raise ValueError("values must be non-empty")
    sentences = _materialize(corpus, DEFAULT_RULES)
    cells = []
    for value in values:
        try:
            if axis == "token_fraction":
                cell_corpus = _truncate_by_tokens(sentences, float(value))
                cell_config = config
            else:
                cell_corpus = sentences
                cell_config = replace(config, window=int(value))
            result = train(cell_corpus, cell_config, lexicon, dtype=dtype, progress=progress)
            word_vectors = result.word_vectors
            reports = {d.name: eval_word_similarity(word_vectors, d) for d in datasets}
            cells.append(SweepCell(axis, float(value), reports))
        except Exception as exc:  # keep sweeping, report the cell
            cells.append(SweepCell(axis, float(value), {}, f"{type(exc).__name__}: {exc}"))
    return cells
