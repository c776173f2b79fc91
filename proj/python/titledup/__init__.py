"""Candidate-pair generation, scoring and evaluation for title corpora."""

from ._core import (
    CandidatePair,
    Corpus,
    EmbeddingStore,
    PairScores,
    TitleRecord,
    TitledupError,
    correlate,
    cosine_similarity,
    count_pairs,
    detect_language,
    embed_distance,
    evaluate,
    export_scatter,
    generate_pairs,
    levenshtein,
    levenshtein_normalized,
    load_corpus,
    load_embeddings,
    normalize_title,
    parse_embeddings,
    run_cli,
    sample_pairs,
    score_pairs,
    token_cosine_similarity,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
