"""Term-aware metrics: exact match, window overlap and TER token weights."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core import ConstraintSpec, Span, TokenizedSentence
from ..lemma import Lemmatizer, LemmatizerSpec, ensure_lemmas, get_lemmatizer

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalInstance:
    source: TokenizedSentence
    hypothesis: TokenizedSentence
    reference: TokenizedSentence
    expected_terms: Tuple[ConstraintSpec, ...] = ()

    def with_lemmas(self, spec: LemmatizerSpec) -> "EvalInstance":
        return EvalInstance(
            self.source,
            ensure_lemmas(self.hypothesis, spec),
            ensure_lemmas(self.reference, spec),
            tuple(self.expected_terms),
        )


@dataclass(frozen=True)
class TermWeights:
    base_weight: float = 1.0
    term_weight: float = 2.0

    def __post_init__(self):
        if self.base_weight <= 0 or self.term_weight < self.base_weight:
            raise ValueError("need 0 < base_weight <= term_weight")


def find_all(seq: Sequence[str], pat: Sequence[str]) -> List[int]:
    k = len(pat)
    if k == 0 or k > len(seq):
        return []
    first = pat[0]
    pat = tuple(pat)
    return [i for i in range(len(seq) - k + 1) if seq[i] == first and tuple(seq[i:i + k]) == pat]


def term_spans(term: ConstraintSpec, sent: TokenizedSentence, lem: Lemmatizer) -> List[Span]:
    """Every span where any variant occurs, at surface or lemma level."""
    spans = set()
    for variant in term.variants:
        k = len(variant)
        for i in find_all(sent.surface, variant):
            spans.add((i, i + k))
        for i in find_all(sent.lemmas, lem.tokens(variant)):
            spans.add((i, i + k))
    return sorted(spans)


def locate_term(term: ConstraintSpec, sent: TokenizedSentence, lem: Lemmatizer) -> Optional[Span]:
    """First hit of the first variant found; surface hits beat lemma hits."""
    for variant in term.variants:
        k = len(variant)
        hits = find_all(sent.surface, variant) or find_all(sent.lemmas, lem.tokens(variant))
        if hits:
            return (hits[0], hits[0] + k)
    return None


def term_covered(term: ConstraintSpec, sent: TokenizedSentence, lem: Lemmatizer) -> bool:
    return locate_term(term, sent, lem) is not None


def _terms(inst: EvalInstance, dedupe: bool) -> Sequence[ConstraintSpec]:
    if not dedupe:
        return inst.expected_terms
    out: List[ConstraintSpec] = []
    for t in inst.expected_terms:
        if t.variants not in [o.variants for o in out]:
            out.append(t)
    return out


@dataclass
class ExactMatchResult:
    score: float
    covered: int
    total: int
    per_instance: List[Tuple[int, int]] = field(default_factory=list)
    # true when there were no expected terms and the score is vacuous
    no_terms: bool = False


def exact_match(
    instances: Sequence[EvalInstance],
    spec: LemmatizerSpec = LemmatizerSpec(),
    dedupe_terms: bool = False,
) -> ExactMatchResult:
    """Fraction of expected term instances present in the hypotheses.

    A term counts when any variant appears contiguously in the hypothesis,
    either as surface tokens (case-sensitive) or as lemmas.
    """
    lem = get_lemmatizer(spec)
    covered = total = 0
    per = []
    for inst in instances:
        hyp = ensure_lemmas(inst.hypothesis, spec)
        terms = _terms(inst, dedupe_terms)
        c = sum(term_covered(t, hyp, lem) for t in terms)
        per.append((c, len(terms)))
        covered += c
        total += len(terms)
    if total == 0:
        log.warning("no expected terms; exact match reported as 1.0")
        return ExactMatchResult(1.0, 0, 0, per, no_terms=True)
    return ExactMatchResult(covered / total, covered, total, per)


def _window(lemmas: Sequence[str], span: Span, size: int) -> Counter:
    a, b = span
    return Counter(lemmas[max(0, a - size):a]) + Counter(lemmas[b:b + size])


def window_scores(
    inst: EvalInstance, window_size: int, lem: Lemmatizer, spec: LemmatizerSpec, dedupe_terms: bool = False
) -> List[float]:
    """Per-term window-overlap scores for the terms present in the reference."""
    if window_size < 1:
        raise ValueError("window_size must be >= 1")
    hyp = ensure_lemmas(inst.hypothesis, spec)
    ref = ensure_lemmas(inst.reference, spec)
    out = []
    for term in _terms(inst, dedupe_terms):
        rspan = locate_term(term, ref, lem)
        if rspan is None:
            continue
        hspan = locate_term(term, hyp, lem)
        if hspan is None:
            out.append(0.0)
            continue
        rwin = _window(ref.lemmas, rspan, window_size)
        hwin = _window(hyp.lemmas, hspan, window_size)
        rsize = sum(rwin.values())
        if rsize == 0:
            out.append(1.0 if not hwin else 0.0)
        else:
            out.append(sum((hwin & rwin).values()) / rsize)
    return out


def window_overlap(
    instances: Sequence[EvalInstance],
    window_size: int,
    spec: LemmatizerSpec = LemmatizerSpec(),
    dedupe_terms: bool = False,
) -> float:
    """Mean context overlap around each reference-located term.

    A term found in the reference but missing from the hypothesis scores 0;
    terms absent from the reference are skipped. With no scorable term the
    result is 1.0.
    """
    lem = get_lemmatizer(spec)
    scores: List[float] = []
    for inst in instances:
        scores.extend(window_scores(inst, window_size, lem, spec, dedupe_terms))
    return float(np.mean(scores)) if scores else 1.0


def term_weights_for(
    sentence: TokenizedSentence,
    expected_terms: Sequence[ConstraintSpec],
    weights: TermWeights = TermWeights(),
    spec: LemmatizerSpec = LemmatizerSpec(),
) -> np.ndarray:
    """Per-token TER weights: ``term_weight`` inside any located term span."""
    sentence = ensure_lemmas(sentence, spec)
    lem = get_lemmatizer(spec)
    in_term = np.zeros(len(sentence), dtype=bool)
    for term in expected_terms:
        for a, b in term_spans(term, sentence, lem):
            in_term[a:b] = True
    return np.where(in_term, weights.term_weight, weights.base_weight)

