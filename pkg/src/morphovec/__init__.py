"""morphovec: CBOW word embeddings with morpheme-meaning composition variants.

Training composes each context word's vector with the vectors of its
morphemes' meaning words (equal-share, similarity-weighted or best-per-kind)
or, for the explicit baseline, with the morphemes' own vectors. Ships with
word-similarity, analogy, nearest-neighbor, PCA and parameter-sweep
evaluation plus interoperable text/binary embedding persistence.
"""

__version__ = "0.1.0"

from .corpus import (
    DEFAULT_RULES,
    TokenFilterRules,
    TrainingWindow,
    Vocabulary,
    build_vocabulary,
    encode_sentences,
    iterate_windows,
    keep_probability_array,
    read_sentences,
    subsample_keep_probability,
    tokenize_line,
)
from .evaluation import (
    AnalogyDataset,
    EvalReport,
    SimilarityDataset,
    SweepCell,
    cosine,
    eval_analogy,
    eval_word_similarity,
    load_analogy_dataset,
    load_similarity_dataset,
    n_nearest,
    pca_project,
    run_sweep,
    spearman_rho,
)
from .io import load_embeddings, read_manifest, save_embeddings, write_manifest
from .model import (
    Composition,
    CompositionTable,
    EmbeddingMatrix,
    Variant,
    WordVectors,
    compose_context_vector,
    gradient_coefficients,
)
from .morphology import (
    MaxMeaningSet,
    MeaningEntry,
    MorphemeLexicon,
    MorphemeSegmentation,
    WordMeanings,
    WordMorphemeMap,
    build_word_morpheme_map,
    load_lexicon,
    save_word_map,
    segment_word,
    select_max_meanings,
)
from .trainer import (
    TrainingConfig,
    TrainResult,
    UnigramTable,
    draw_negatives,
    negative_sampling_loss,
    sgd_step,
    sigmoid,
    train,
)
