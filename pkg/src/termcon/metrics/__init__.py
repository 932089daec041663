from .bleu import corpus_bleu, sentence_stats
from .report import EvalConfig, MetricReport, evaluate
from .ter import TerStats, ter, ter_stats
from .terms import (
    EvalInstance,
    ExactMatchResult,
    TermWeights,
    exact_match,
    locate_term,
    term_covered,
    term_weights_for,
    window_overlap,
)

__all__ = [
    "EvalConfig",
    "EvalInstance",
    "ExactMatchResult",
    "MetricReport",
    "TerStats",
    "TermWeights",
    "corpus_bleu",
    "evaluate",
    "exact_match",
    "locate_term",
    "sentence_stats",
    "ter",
    "ter_stats",
    "term_covered",
    "term_weights_for",
    "window_overlap",
]
