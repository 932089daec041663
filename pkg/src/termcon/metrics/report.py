"""Assemble all metrics into one corpus report."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..lemma import LemmatizerSpec, get_lemmatizer
from .bleu import EPSILON, bleu_from_stats, sentence_stats
from .ter import ter_stats
from .terms import EvalInstance, TermWeights, exact_match, term_weights_for, window_scores


@dataclass(frozen=True)
class EvalConfig:
    lemmatizer: LemmatizerSpec = LemmatizerSpec()
    weights: TermWeights = TermWeights()
    windows: Tuple[int, ...] = (2, 3)
    shift_cost: float = 1.0
    dedupe_terms: bool = False
    bleu_epsilon: float = EPSILON


@dataclass
class MetricReport:
    bleu: float
    exact_match: float
    window2: float
    window3: float
    one_minus_term: float
    counts: Dict[str, int]
    per_sentence: Dict[str, list] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def summary(self) -> Dict[str, float]:
        return {
            "BLEU": self.bleu,
            "EM": self.exact_match,
            "window 2": self.window2,
            "window 3": self.window3,
            "1-TERm": self.one_minus_term,
        }

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, indent=2)


def evaluate(instances: Sequence[EvalInstance], cfg: EvalConfig = EvalConfig()) -> MetricReport:
    if not instances:
        raise ValueError("cannot evaluate an empty corpus")
    spec = cfg.lemmatizer
    lem = get_lemmatizer(spec)
    instances = [inst.with_lemmas(spec) for inst in instances]
    warnings: List[str] = []

    stats = [sentence_stats(i.hypothesis, i.reference) for i in instances]
    bleu = bleu_from_stats(np.sum(stats, axis=0), epsilon=cfg.bleu_epsilon)

    em = exact_match(instances, spec, cfg.dedupe_terms)
    if em.no_terms:
        warnings.append("no expected terms: exact match is vacuously 1.0")

    windows: Dict[int, List[List[float]]] = {}
    for w in cfg.windows:
        windows[w] = [window_scores(i, w, lem, spec, cfg.dedupe_terms) for i in instances]

    def _mean(per: List[List[float]]) -> float:
        flat = [x for row in per for x in row]
        return float(np.mean(flat)) if flat else 1.0

    ter_cost = ter_weight = 0.0
    per_ter = []
    for inst in instances:
        hw = term_weights_for(inst.hypothesis, inst.expected_terms, cfg.weights, spec)
        rw = term_weights_for(inst.reference, inst.expected_terms, cfg.weights, spec)
        st = ter_stats(inst.hypothesis, inst.reference, hw, rw, cfg.shift_cost * cfg.weights.base_weight)
        if st.flagged:
            warnings.append("empty reference with non-empty hypothesis")
        ter_cost += st.cost
        ter_weight += st.ref_weight
        per_ter.append(st.score)
    term = ter_cost / ter_weight if ter_weight > 0 else (0.0 if ter_cost == 0 else ter_cost)

    return MetricReport(
        bleu=bleu,
        exact_match=em.score,
        window2=_mean(windows[2]) if 2 in windows else float("nan"),
        window3=_mean(windows[3]) if 3 in windows else float("nan"),
        one_minus_term=1.0 - term,
        counts={"terms_total": em.total, "terms_covered": em.covered, "sentences": len(instances)},
        per_sentence={
            "terms_covered": [c for c, _ in em.per_instance],
            "terms_total": [t for _, t in em.per_instance],
            "window2": windows.get(2, []),
            "window3": windows.get(3, []),
            "term": per_ter,
        },
        warnings=sorted(set(warnings)),
    )
