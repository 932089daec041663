"""Rank-based system combination with term coverage and a baseline fallback."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .core import ConstraintSpec, TokenizedSentence
from .lemma import LemmatizerSpec, ensure_lemmas, get_lemmatizer
from .metrics.terms import find_all


@dataclass(frozen=True)
class SystemOutput:
    system_id: str
    validation_bleu: float
    translations: Tuple[TokenizedSentence, ...]

    def __post_init__(self):
        object.__setattr__(self, "translations", tuple(self.translations))


def _covered_lemma(term: ConstraintSpec, sent: TokenizedSentence, lem) -> bool:
    return any(find_all(sent.lemmas, lem.tokens(v)) for v in term.variants)


def rank_systems(systems: Sequence[SystemOutput]) -> List[SystemOutput]:
    """Best validation BLEU first; ties broken by system id."""
    return sorted(systems, key=lambda s: (-s.validation_bleu, s.system_id))


def combine(
    systems: Sequence[SystemOutput],
    baseline_id: str,
    per_line_terms: Sequence[Sequence[ConstraintSpec]],
    spec: LemmatizerSpec = LemmatizerSpec(),
    partial: bool = False,
) -> List[Tuple[str, TokenizedSentence]]:
    """Pick, per line, the best-ranked translation that contains its terms.

    A system qualifies when its translation contains every expected term (any
    variant) at lemma level. When none qualifies the baseline's translation is
    used. With ``partial`` the system covering the most terms is preferred
    before falling back, which makes the combination's term coverage at least
    that of every input system.
    """
    if not systems:
        raise ValueError("no systems to combine")
    ids = [s.system_id for s in systems]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate system ids")
    if baseline_id not in ids:
        raise ValueError(f"baseline {baseline_id!r} is not among the systems")
    n = len(per_line_terms)
    for s in systems:
        if len(s.translations) != n:
            raise ValueError(
                f"system {s.system_id!r} has {len(s.translations)} lines, expected {n}"
            )
    lem = get_lemmatizer(spec)
    ranked = rank_systems(systems)
    baseline = next(s for s in systems if s.system_id == baseline_id)
    out: List[Tuple[str, TokenizedSentence]] = []
    for line, terms in enumerate(per_line_terms):
        chosen = None
        best_partial = (0, None)
        for sys_out in ranked:
            sent = ensure_lemmas(sys_out.translations[line], spec)
            hits = sum(_covered_lemma(t, sent, lem) for t in terms)
            if hits == len(terms):
                chosen = sys_out
                break
            if partial and hits > best_partial[0]:
                best_partial = (hits, sys_out)
        if chosen is None:
            chosen = best_partial[1] if best_partial[1] is not None else baseline
        out.append((chosen.system_id, chosen.translations[line]))
    return out
