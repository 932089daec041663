"""Weighted translation edit rate with greedy block shifts.

Costs: an unmatched hypothesis token costs its weight, an unmatched reference
token costs its weight, a substitution costs the larger of the two weights and
every block shift costs ``shift_cost``. Hypothesis weights travel with their
tokens when a block is shifted. With unit weights this is plain TER.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from .. import _kernels
from .._kernels import OP_HYP, OP_MATCH, OP_SUB, TOL
from ..core import TokenizedSentence

MAX_SHIFT_SIZE = 10
MAX_SHIFT_DIST = 50


@dataclass(frozen=True)
class TerStats:
    cost: float
    ref_weight: float
    shifts: int
    # set when the reference is empty but the hypothesis is not
    flagged: bool = False

    @property
    def score(self) -> float:
        if self.ref_weight > 0:
            return self.cost / self.ref_weight
        return self.cost / 1.0 if self.flagged else 0.0


def _tokens(x) -> Sequence[str]:
    return x.surface if isinstance(x, TokenizedSentence) else x


def _encode(hyp: Sequence[str], ref: Sequence[str]):
    vocab: Dict[str, int] = {}
    h = np.array([vocab.setdefault(t, len(vocab)) for t in hyp], dtype=np.int64)
    r = np.array([vocab.setdefault(t, len(vocab)) for t in ref], dtype=np.int64)
    return h, r


def _alignment(path: np.ndarray, nh: int, nr: int):
    """Hypothesis position of every reference token, and exact-match links."""
    ref_pos = np.zeros(nr + 1, dtype=np.int64)
    hyp_link = np.full(nh, -1, dtype=np.int64)
    i = j = 0
    for op in path:
        if op == OP_MATCH or op == OP_SUB:
            ref_pos[j] = i
            if op == OP_MATCH:
                hyp_link[i] = j
            i += 1
            j += 1
        elif op == OP_HYP:
            i += 1
        else:
            ref_pos[j] = i
            j += 1
    ref_pos[nr] = nh
    return ref_pos, hyp_link


def _candidates(h, r, path, max_size, max_dist) -> np.ndarray:
    nh, nr = h.shape[0], r.shape[0]
    ref_pos, hyp_link = _alignment(path, nh, nr)
    starts = defaultdict(list)
    hl, rl = h.tolist(), r.tolist()
    for j in range(nr):
        for L in range(1, min(max_size, nr - j) + 1):
            starts[tuple(rl[j:j + L])].append(j)
    seen = set()
    out: List[tuple] = []
    for i in range(nh):
        for L in range(1, min(max_size, nh - i) + 1):
            refs = starts.get(tuple(hl[i:i + L]))
            if refs is None:
                break  # longer phrases cannot occur either
            for j in refs:
                if all(hyp_link[i + k] == j + k for k in range(L)):
                    continue
                for d_orig in (ref_pos[j], ref_pos[j] + 1, ref_pos[min(j + L, nr)], j):
                    if d_orig < 0 or d_orig > nh or i <= d_orig <= i + L:
                        continue
                    if abs(d_orig - i) > max_dist:
                        continue
                    d = d_orig if d_orig < i else d_orig - L
                    key = (i, L, d)
                    if key not in seen:
                        seen.add(key)
                        out.append(key)
    return np.array(out, dtype=np.int64).reshape(-1, 3)


def ter_stats(
    hypothesis,
    reference,
    hyp_weights: Optional[Sequence[float]] = None,
    ref_weights: Optional[Sequence[float]] = None,
    shift_cost: float = 1.0,
    max_shift_size: int = MAX_SHIFT_SIZE,
    max_shift_dist: int = MAX_SHIFT_DIST,
) -> TerStats:
    hyp, ref = _tokens(hypothesis), _tokens(reference)
    hw = np.ones(len(hyp)) if hyp_weights is None else np.asarray(hyp_weights, dtype=np.float64)
    rw = np.ones(len(ref)) if ref_weights is None else np.asarray(ref_weights, dtype=np.float64)
    if hw.shape[0] != len(hyp) or rw.shape[0] != len(ref):
        raise ValueError("weight vectors must match token counts")
    if (hw <= 0).any() or (rw <= 0).any():
        raise ValueError("weights must be positive")
    ref_weight = float(rw.sum())
    if len(ref) == 0:
        return TerStats(float(hw.sum()), 0.0, 0, flagged=len(hyp) > 0)
    h, r = _encode(hyp, ref)
    cost, path = _kernels.weighted_edit_distance(h, r, hw, rw, with_path=True)
    shifts = 0
    while cost > TOL:
        cands = _candidates(h, r, path, max_shift_size, max_shift_dist)
        if cands.shape[0] == 0:
            break
        after = _kernels.shifted_costs(h, r, hw, rw, cands)
        gains = cost - (after + shift_cost)
        best = int(np.argmax(gains))
        if gains[best] <= TOL:
            break
        i, L, d = (int(x) for x in cands[best])
        h, hw = _kernels.apply_shift(h, hw, i, L, d)
        cost, path = _kernels.weighted_edit_distance(h, r, hw, rw, with_path=True)
        shifts += 1
    return TerStats(cost + shifts * shift_cost, ref_weight, shifts)


def ter(hypothesis, reference, hyp_weights=None, ref_weights=None, shift_cost: float = 1.0) -> float:
    """Weighted TER of one sentence pair (edit cost over total reference weight)."""
    return ter_stats(hypothesis, reference, hyp_weights, ref_weights, shift_cost).score
