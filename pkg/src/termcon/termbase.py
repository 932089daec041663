"""Terminology database loading and source-side term spotting."""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from .core import ConstraintSpec, Mode, Origin, Span, Tokens, TokenizedSentence, tokenize
from .lemma import LemmatizerSpec, ensure_lemmas, get_lemmatizer, lemma_variant


class TermBaseError(ValueError):
    pass


class MatchLevel(enum.Enum):
    SURFACE = "surface"
    LEMMA = "lemma"


class VariantPolicy(enum.Enum):
    FIRST_ONLY = "first"
    ALL = "all"


@dataclass(frozen=True)
class TermEntry:
    source_term: Tokens
    source_lemmas: Tokens
    variants: Tuple[Tokens, ...]
    variant_lemmas: Tuple[Tokens, ...]

    def __post_init__(self):
        if not self.source_term or len(self.source_lemmas) != len(self.source_term):
            raise TermBaseError("source lemmas must be parallel to a non-empty source term")
        if not self.variants or len(self.variant_lemmas) != len(self.variants):
            raise TermBaseError("entry needs at least one target variant")
        for v, vl in zip(self.variants, self.variant_lemmas):
            if not v or len(v) != len(vl):
                raise TermBaseError("variant lemmas must be parallel to variants")


@dataclass(frozen=True)
class TermMatch:
    entry_index: int
    span: Span
    level: MatchLevel


@dataclass
class TermBase:
    entries: List[TermEntry] = field(default_factory=list)
    index: Dict[str, List[int]] = field(default_factory=dict)
    # lemmas stored with restore_case applied, used for lemma-mode constraints
    cased_variant_lemmas: List[Tuple[Tokens, ...]] = field(default_factory=list)

    @classmethod
    def build(cls, entries: Sequence[TermEntry], spec: LemmatizerSpec) -> "TermBase":
        lem = get_lemmatizer(spec)
        index: Dict[str, List[int]] = defaultdict(list)
        cased = []
        for i, entry in enumerate(entries):
            index[entry.source_lemmas[0]].append(i)
            cased.append(tuple(lemma_variant(lem, v, True) for v in entry.variants))
        return cls(list(entries), dict(index), cased)

    def __len__(self) -> int:
        return len(self.entries)


def make_entry(source: str, variants: Sequence[str], spec: LemmatizerSpec) -> TermEntry:
    lem = get_lemmatizer(spec)
    src = tokenize(source).surface
    seen: List[Tokens] = []
    for v in variants:
        toks = tokenize(v).surface
        if toks and toks not in seen:
            seen.append(toks)
    return TermEntry(src, lem.tokens(src), tuple(seen), tuple(lem.tokens(v) for v in seen))


def load_termbase(path: str | Path, spec: LemmatizerSpec) -> TermBase:
    """Read a ``source<TAB>variant1<TAB>variant2...`` file.

    Blank lines are skipped; repeated variants inside one entry are collapsed
    keeping the first position.
    """
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) < 2 or not cols[0].strip():
                raise TermBaseError(f"{path}:{lineno}: expected source<TAB>target[<TAB>target...]")
            targets = [c for c in cols[1:] if c.strip()]
            if not targets:
                raise TermBaseError(f"{path}:{lineno}: no target variant")
            entries.append(make_entry(cols[0], targets, spec))
    return TermBase.build(entries, spec)


def find_matches(sentence: TokenizedSentence, tb: TermBase, spec: LemmatizerSpec) -> List[TermMatch]:
    """Greedy left-to-right longest match.

    At each position the longest entry wins; at equal length a surface match
    beats a lemma match and then the earlier entry wins. Matched tokens are
    consumed.
    """
    sentence = ensure_lemmas(sentence, spec)
    surface, lemmas = sentence.surface, sentence.lemmas
    n = len(surface)
    out: List[TermMatch] = []
    i = 0
    while i < n:
        best = None  # (length, is_surface, -entry_index)
        for idx in tb.index.get(lemmas[i], ()):
            entry = tb.entries[idx]
            k = len(entry.source_term)
            if i + k > n:
                continue
            if surface[i:i + k] == entry.source_term:
                key = (k, 1, -idx)
            elif lemmas[i:i + k] == entry.source_lemmas:
                key = (k, 0, -idx)
            else:
                continue
            if best is None or key > best:
                best = key
        if best is None:
            i += 1
            continue
        k, is_surface, neg_idx = best
        level = MatchLevel.SURFACE if is_surface else MatchLevel.LEMMA
        out.append(TermMatch(-neg_idx, (i, i + k), level))
        i += k
    return out


def matches_to_constraints(
    matches: Sequence[TermMatch],
    tb: TermBase,
    mode: Mode = Mode.SURFACE,
    variant_policy: VariantPolicy = VariantPolicy.ALL,
    restore_case: bool = True,
) -> List[ConstraintSpec]:
    out = []
    for m in matches:
        if not 0 <= m.entry_index < len(tb.entries):
            raise IndexError(f"term match refers to missing entry {m.entry_index}")
        entry = tb.entries[m.entry_index]
        if mode is Mode.LEMMA:
            pool = tb.cased_variant_lemmas[m.entry_index] if restore_case else entry.variant_lemmas
        else:
            pool = entry.variants
        variants: List[Tokens] = []
        for v in pool:
            if v not in variants:
                variants.append(v)
        if variant_policy is VariantPolicy.FIRST_ONLY:
            variants = variants[:1]
        out.append(ConstraintSpec(tuple(variants), Origin.TERMBASE, mode, m.span))
    return out
