"""Corpus-level BLEU on whitespace tokens."""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

import numpy as np

from ..core import TokenizedSentence, tokenize

EPSILON = 1e-9


def _toks(x) -> Sequence[str]:
    if isinstance(x, TokenizedSentence):
        return x.surface
    if isinstance(x, str):
        return tokenize(x).surface
    return x


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def sentence_stats(hyp, ref, max_n: int = 4) -> np.ndarray:
    """Integer statistics ``[match_1..match_N, total_1..total_N, hyp_len, ref_len]``.

    Statistics add up across sentences, so corpus BLEU is order-independent.
    """
    h, r = _toks(hyp), _toks(ref)
    out = np.zeros(2 * max_n + 2, dtype=np.int64)
    for n in range(1, max_n + 1):
        hc = _ngrams(h, n)
        rc = _ngrams(r, n)
        out[n - 1] = sum(min(c, rc[g]) for g, c in hc.items())
        out[max_n + n - 1] = max(len(h) - n + 1, 0)
    out[-2] = len(h)
    out[-1] = len(r)
    return out


def bleu_from_stats(stats: np.ndarray, max_n: int = 4, epsilon: float = EPSILON) -> float:
    """BLEU in [0, 100]. Zero match counts are replaced by ``epsilon``."""
    matches, totals = stats[:max_n], stats[max_n:2 * max_n]
    hyp_len, ref_len = int(stats[-2]), int(stats[-1])
    if hyp_len == 0:
        return 0.0
    log_p = 0.0
    for m, t in zip(matches.tolist(), totals.tolist()):
        log_p += math.log((m if m > 0 else epsilon) / (t if t > 0 else 1))
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_p / max_n)


def corpus_bleu(hypotheses, references, max_n: int = 4, epsilon: float = EPSILON) -> float:
    if len(hypotheses) != len(references):
        raise ValueError("hypotheses and references differ in length")
    if len(hypotheses) == 0:
        raise ValueError("cannot score an empty corpus")
    stats = sum(sentence_stats(h, r, max_n) for h, r in zip(hypotheses, references))
    return bleu_from_stats(stats, max_n, epsilon)
