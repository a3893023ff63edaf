"""Synthetic corpus with planted morpheme families for end-to-end trend tests.

Each family owns a suffix (e.g. "zax"), one gloss word that the suffix maps
to in the lexicon, and a private topic vocabulary. Family sentences mix
member words (root + suffix), repeated gloss tokens and topic words, plus a
few corpus-wide fillers, so member words both share contexts (learnable by
plain CBOW) and share a morpheme meaning (exploitable by the implicit
variants).
"""

from itertools import combinations, product

import numpy as np

from morphovec.evaluation import AnalogyDataset
from morphovec.morphology import MorphemeLexicon

CONSONANTS = "bcdfghklmnprstvw"
VOWELS = "aeiou"


def _root_inventory(n_roots):
    roots = []
    for c1, v, c2 in product(CONSONANTS, VOWELS, CONSONANTS):
        roots.append(c1 + v + c2)
        if len(roots) == n_roots:
            return roots
    raise ValueError("not enough distinct roots")


class PlantedCorpus:
    def __init__(self, rng, n_tokens=1_000_000, n_families=20, n_roots=25,
                 members_per_sentence=3, gloss_repeats=2, topics_per_family=15,
                 topic_draws=5, n_fillers=30, filler_draws=4):
        if n_families > 20:
            raise ValueError("at most 20 families (one letter per suffix)")
        self.n_families = n_families
        self.n_roots = n_roots
        self.suffixes = [f"z{chr(97 + f)}x" for f in range(n_families)]
        self.glosses = [f"glo{chr(97 + f)}" for f in range(n_families)]
        roots = _root_inventory(n_roots)
        self.members = [[root + suf for root in roots] for suf in self.suffixes]
        topics = [[f"top{f}q{i}" for i in range(topics_per_family)]
                  for f in range(n_families)]
        fillers = [f"com{i}" for i in range(n_fillers)]

        sentence_len = members_per_sentence + gloss_repeats + topic_draws + filler_draws
        n_sentences = n_tokens // sentence_len
        families = rng.integers(0, n_families, size=n_sentences)
        member_draws = rng.integers(0, n_roots, size=(n_sentences, members_per_sentence))
        topic_picks = rng.integers(0, topics_per_family, size=(n_sentences, topic_draws))
        filler_picks = rng.integers(0, n_fillers, size=(n_sentences, filler_draws))

        sentences = []
        for s in range(n_sentences):
            f = int(families[s])
            sentence = [self.members[f][i] for i in member_draws[s]]
            sentence += [self.glosses[f]] * gloss_repeats
            sentence += [topics[f][i] for i in topic_picks[s]]
            sentence += [fillers[i] for i in filler_picks[s]]
            sentences.append(sentence)
        self.sentences = sentences

    def lexicon(self):
        suffixes = {suf: [gloss] for suf, gloss in zip(self.suffixes, self.glosses)}
        return MorphemeLexicon({}, {}, suffixes)

    def same_family_pairs(self, rng, per_family=30):
        """(word, word) pairs sharing a suffix, sampled across all families."""
        pairs = []
        for family in self.members:
            all_pairs = list(combinations(range(self.n_roots), 2))
            picks = rng.choice(len(all_pairs), size=min(per_family, len(all_pairs)),
                               replace=False)
            pairs.extend((family[all_pairs[p][0]], family[all_pairs[p][1]]) for p in picks)
        return pairs

    def analogy_questions(self, rng, n_questions=300):
        """root_i+suf_f : root_i+suf_g :: root_j+suf_f : root_j+suf_g."""
        questions = set()
        while len(questions) < n_questions:
            i, j = rng.choice(self.n_roots, size=2, replace=False)
            f, g = rng.choice(self.n_families, size=2, replace=False)
            questions.add((self.members[f][i], self.members[g][i],
                           self.members[f][j], self.members[g][j]))
        return AnalogyDataset("planted", sorted(questions))


def mean_pair_cosine(vectors, pairs):
    units = vectors.unit_vectors()
    total = 0.0
    for w1, w2 in pairs:
        total += float(units[vectors.index[w1]] @ units[vectors.index[w2]])
    return total / len(pairs)
