import math

import numpy as np
import pytest

from morphovec.corpus import (
    TokenFilterRules,
    Vocabulary,
    build_vocabulary,
    encode_sentences,
    iterate_windows,
    keep_probability_array,
    subsample_keep_probability,
    tokenize_line,
)


class TestTokenize:
    def test_numbers_and_trailing_period(self):
        assert tokenize_line("He is 42.") == ["he", "is"]

    def test_empty_line(self):
        assert tokenize_line("") == []

    def test_punctuation_stripping(self):
        assert tokenize_line("good, anthropologist!") == ["good", "anthropologist"]

    def test_interior_commas_and_periods(self):
        assert tokenize_line("1,000.5 u.s. can't") == ["us", "can't"]

    def test_rules_can_be_disabled(self):
        rules = TokenFilterRules(drop_numeric=False, strip_punctuation=False, lowercase=False)
        assert tokenize_line("He is 42.", rules) == ["He", "is", "42."]

    def test_unicode_punctuation(self):
        assert tokenize_line("“quoted” — dash") == ["quoted", "dash"]

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        alphabet = list("abc XY.,!?“”'-:; 019")
        for _ in range(300):
            line = "".join(rng.choice(alphabet, size=rng.integers(0, 40)))
            once = tokenize_line(line)
            twice = tokenize_line(" ".join(once))
            assert once == twice


class TestVocabulary:
    def test_min_count_filter(self):
        vocab = build_vocabulary(["a", "a", "b", "a", "b", "c"], min_count=2)
        assert vocab.entries == [("a", 3), ("b", 2)]
        assert "c" not in vocab
        assert vocab.total_tokens == 5

    def test_single_word(self):
        vocab = build_vocabulary(["x"], min_count=1)
        assert vocab.entries == [("x", 1)]

    def test_tie_break_is_lexicographic(self):
        vocab = build_vocabulary(["b", "a"] * 5, min_count=1)
        assert vocab.words == ["a", "b"]

    def test_ids_round_trip(self):
        vocab = build_vocabulary("the quick brown fox the lazy dog the".split(), min_count=1)
        for i, word in enumerate(vocab.words):
            assert vocab.index[word] == i

    def test_empty_corpus_errors(self):
        with pytest.raises(ValueError, match="empty corpus"):
            build_vocabulary([], min_count=1)

    def test_nothing_retained_errors(self):
        with pytest.raises(ValueError):
            build_vocabulary(["a", "b"], min_count=5)

    def test_save_load_round_trip(self, tmp_path):
        vocab = build_vocabulary(["a", "a", "b", "a", "b", "c"], min_count=1)
        path = tmp_path / "vocab.tsv"
        vocab.save(path)
        assert path.read_text() == "a\t3\nb\t2\nc\t1\n"
        loaded = Vocabulary.load(path)
        assert loaded.entries == vocab.entries


class TestSubsampling:
    def test_rare_words_always_kept(self):
        # f == threshold sits on the cap
        assert subsample_keep_probability(10, 10_000, 1e-3) == 1.0
        for count in (1, 2, 5):
            assert subsample_keep_probability(count, 100_000, 1e-3) == 1.0

    def test_frequent_word_value(self):
        # f = 100 * threshold: (sqrt(100) + 1) / 100
        p = subsample_keep_probability(100, 1000, 1e-3)
        assert p == pytest.approx(0.11, abs=1e-12)

    def test_monotone_in_frequency(self):
        rng = np.random.default_rng(3)
        total = 1_000_000
        counts = np.sort(rng.integers(1, total // 2, size=200))
        probs = [subsample_keep_probability(int(c), total, 1e-4) for c in counts]
        assert all(a >= b for a, b in zip(probs, probs[1:]))

    def test_bad_threshold_errors(self):
        with pytest.raises(ValueError):
            subsample_keep_probability(1, 10, 0.0)
        with pytest.raises(ValueError):
            subsample_keep_probability(1, 10, -1.0)

    def test_array_matches_scalar(self):
        vocab = build_vocabulary(["a"] * 50 + ["b"] * 3 + ["c"] * 2, min_count=1)
        arr = keep_probability_array(vocab, 1e-2)
        for wid, count in enumerate(vocab.counts):
            expected = subsample_keep_probability(int(count), vocab.total_tokens, 1e-2)
            assert arr[wid] == pytest.approx(expected, rel=1e-12)

    def test_disabled(self):
        vocab = build_vocabulary(["a", "a"], min_count=1)
        assert keep_probability_array(vocab, None) is None
        assert keep_probability_array(vocab, 0) is None
        assert np.all(keep_probability_array(vocab, math.inf) == 1.0)


def _brute_force_pairs(sentence, window):
    pairs = []
    for i, target in enumerate(sentence):
        for j in range(max(0, i - window), min(len(sentence), i + window + 1)):
            if j != i:
                pairs.append((target, sentence[j]))
    return sorted(pairs)


class TestWindows:
    def test_middle_target_full_context(self):
        wins = list(iterate_windows([10, 11, 12], 1, np.random.default_rng(0)))
        by_target = {w.target: list(w.context) for w in wins}
        assert by_target[11] == [10, 12]

    def test_single_token_no_windows(self):
        assert list(iterate_windows([5], 3, np.random.default_rng(0))) == []

    def test_boundary_clipping(self):
        wins = list(iterate_windows([0, 1], 5, np.random.default_rng(0), dynamic=False))
        assert [(w.target, list(w.context)) for w in wins] == [(0, [1]), (1, [0])]

    def test_matches_brute_force_enumeration(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            sentence = rng.integers(0, 30, size=rng.integers(2, 25)).tolist()
            window = int(rng.integers(1, 6))
            emitted = []
            for win in iterate_windows(sentence, window, rng, dynamic=False):
                emitted.extend((win.target, int(c)) for c in win.context)
            assert sorted(emitted) == _brute_force_pairs(sentence, window)

    def test_dynamic_width_stays_within_window(self):
        rng = np.random.default_rng(1)
        sentence = list(range(40))
        for win in iterate_windows(sentence, 4, rng):
            assert 1 <= len(win.context) <= 8
            assert win.target not in win.context  # distinct ids in this sentence

    def test_subsampling_removes_positions_before_windowing(self):
        rng = np.random.default_rng(0)
        keep = np.array([1.0, 0.0])  # word 1 never survives
        wins = list(iterate_windows([0, 1, 0, 1, 0], 2, rng, keep_prob=keep, dynamic=False))
        assert wins, "expected windows over the surviving tokens"
        for win in wins:
            assert win.target == 0
            assert all(c == 0 for c in win.context)

    def test_bad_window_errors(self):
        with pytest.raises(ValueError):
            list(iterate_windows([1, 2], 0, np.random.default_rng(0)))


def test_encode_sentences_drops_oov():
    vocab = build_vocabulary(["a", "a", "b", "b"], min_count=2)
    encoded = encode_sentences([["a", "zzz", "b"], ["zzz"]], vocab)
    assert len(encoded) == 1
    assert encoded[0].tolist() == [vocab.index["a"], vocab.index["b"]]
