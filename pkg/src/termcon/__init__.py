"""Terminology-constrained MT data preparation, term matching and term-aware evaluation."""

__version__ = "0.1.0"

from .annotate import AnnotationConfig, AnnotationError, Scheme, annotate, strip_annotation
from .combine import SystemOutput, combine, rank_systems
from .core import (
    AnnotatedSentence,
    ConstraintSpec,
    Mode,
    Origin,
    SentencePair,
    TokenizedSentence,
    pretokenize,
    read_parallel,
    tokenize,
)
from .lemma import Lemmatizer, LemmatizerSpec, get_lemmatizer
from .pipeline import CleanStats, FilterConfig, clean, load_config, run_pipeline
from .sampler import NgramPool, SamplerConfig, build_ngram_pool, sample_batch, sample_constraints
from .termbase import MatchLevel, TermBase, TermMatch, VariantPolicy, find_matches, load_termbase

__all__ = [
    "AnnotatedSentence",
    "AnnotationConfig",
    "AnnotationError",
    "CleanStats",
    "ConstraintSpec",
    "FilterConfig",
    "Lemmatizer",
    "LemmatizerSpec",
    "MatchLevel",
    "Mode",
    "NgramPool",
    "Origin",
    "SamplerConfig",
    "Scheme",
    "SentencePair",
    "SystemOutput",
    "TermBase",
    "TermMatch",
    "TokenizedSentence",
    "VariantPolicy",
    "annotate",
    "build_ngram_pool",
    "clean",
    "combine",
    "find_matches",
    "get_lemmatizer",
    "load_config",
    "load_termbase",
    "pretokenize",
    "rank_systems",
    "read_parallel",
    "run_pipeline",
    "sample_batch",
    "sample_constraints",
    "strip_annotation",
    "tokenize",
]
