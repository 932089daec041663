"""Source-side constraint annotation: suffix, factored and replacement schemes."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .core import AnnotatedSentence, ConstraintSpec, Mode, Tokens, TokenizedSentence
from .termbase import TermBase, TermMatch, VariantPolicy, matches_to_constraints


class AnnotationError(ValueError):
    pass


class Scheme(enum.Enum):
    REPLACE = "replace"
    FACTORED = "factored"
    SUFFIX = "suffix"


@dataclass(frozen=True)
class AnnotationConfig:
    scheme: Scheme = Scheme.SUFFIX
    sep_token: str = "<sep>"
    constraint_delim: str = "<c>"
    variant_delim: str = "<v>"
    mode: Mode = Mode.SURFACE

    def __post_init__(self):
        specials = self.specials
        if len(set(specials)) != 3:
            raise ValueError("special tokens must be distinct")
        for tok in specials:
            if not tok or len(tok.split()) != 1 or tok != tok.strip():
                raise ValueError(f"special token {tok!r} must be a single non-empty token")

    @property
    def specials(self) -> Tuple[str, str, str]:
        return (self.sep_token, self.constraint_delim, self.variant_delim)


def _where(line_index: Optional[int]) -> str:
    return f"line {line_index + 1}: " if line_index is not None else ""


def _check_collisions(tokens: Sequence[str], cfg: AnnotationConfig, line_index: Optional[int], what: str):
    specials = set(cfg.specials)
    for pos, tok in enumerate(tokens):
        if tok in specials:
            raise AnnotationError(
                f"{_where(line_index)}special token {tok!r} occurs in {what} at position {pos}"
            )


def annotate_suffix(
    sentence: TokenizedSentence,
    constraints: Sequence[ConstraintSpec],
    cfg: AnnotationConfig = AnnotationConfig(),
    line_index: Optional[int] = None,
) -> AnnotatedSentence:
    """Append ``<sep> c1 <c> c2 ...``; variants inside a constraint joined by ``<v>``."""
    _check_collisions(sentence.surface, cfg, line_index, "the sentence")
    if not constraints:
        return AnnotatedSentence(sentence, ())
    out: List[str] = list(sentence.surface)
    out.append(cfg.sep_token)
    for ci, c in enumerate(constraints):
        if ci:
            out.append(cfg.constraint_delim)
        for vi, variant in enumerate(c.variants):
            _check_collisions(variant, cfg, line_index, "a constraint")
            if vi:
                out.append(cfg.variant_delim)
            out.extend(variant)
    return AnnotatedSentence(TokenizedSentence(tuple(out)), tuple(constraints))


def _spanned(constraints: Sequence[ConstraintSpec], n: int, line_index: Optional[int]) -> List[ConstraintSpec]:
    prev_end = 0
    for c in constraints:
        if c.source_span is None:
            raise AnnotationError(
                f"{_where(line_index)}scheme needs source-aligned constraints; got one without a span"
            )
        a, b = c.source_span
        if a < prev_end or b > n:
            raise AnnotationError(f"{_where(line_index)}constraint spans overlap or exceed the sentence")
        prev_end = b
    return list(constraints)


def annotate_factored_constraints(
    sentence: TokenizedSentence,
    constraints: Sequence[ConstraintSpec],
    cfg: AnnotationConfig = AnnotationConfig(),
    line_index: Optional[int] = None,
) -> AnnotatedSentence:
    """Insert each constraint's first variant right after its source span.

    Factors: 0 ordinary token, 1 source-term token, 2 inserted translation.
    """
    src = sentence.surface
    constraints = _spanned(constraints, len(src), line_index)
    tokens: List[str] = []
    factors: List[int] = []
    pos = 0
    for c in constraints:
        a, b = c.source_span
        tokens.extend(src[pos:a])
        factors.extend([0] * (a - pos))
        tokens.extend(src[a:b])
        factors.extend([1] * (b - a))
        tokens.extend(c.variants[0])
        factors.extend([2] * len(c.variants[0]))
        pos = b
    tokens.extend(src[pos:])
    factors.extend([0] * (len(src) - pos))
    return AnnotatedSentence(TokenizedSentence(tuple(tokens)), tuple(constraints), tuple(factors))


def annotate_replace_constraints(
    sentence: TokenizedSentence,
    constraints: Sequence[ConstraintSpec],
    cfg: AnnotationConfig = AnnotationConfig(),
    line_index: Optional[int] = None,
) -> AnnotatedSentence:
    src = sentence.surface
    constraints = _spanned(constraints, len(src), line_index)
    tokens: List[str] = []
    pos = 0
    for c in constraints:
        a, b = c.source_span
        tokens.extend(src[pos:a])
        tokens.extend(c.variants[0])
        pos = b
    tokens.extend(src[pos:])
    return AnnotatedSentence(TokenizedSentence(tuple(tokens)), tuple(constraints))


def annotate_factored(
    sentence: TokenizedSentence,
    matches: Sequence[TermMatch],
    tb: TermBase,
    cfg: AnnotationConfig = AnnotationConfig(scheme=Scheme.FACTORED),
    line_index: Optional[int] = None,
) -> AnnotatedSentence:
    constraints = matches_to_constraints(matches, tb, cfg.mode, VariantPolicy.FIRST_ONLY)
    return annotate_factored_constraints(sentence, constraints, cfg, line_index)


def annotate_replace(
    sentence: TokenizedSentence,
    matches: Sequence[TermMatch],
    tb: TermBase,
    cfg: AnnotationConfig = AnnotationConfig(scheme=Scheme.REPLACE),
    line_index: Optional[int] = None,
) -> AnnotatedSentence:
    """Substitute every matched span by the entry's first target variant."""
    constraints = matches_to_constraints(matches, tb, cfg.mode, VariantPolicy.FIRST_ONLY)
    return annotate_replace_constraints(sentence, constraints, cfg, line_index)


def annotate(
    sentence: TokenizedSentence,
    constraints: Sequence[ConstraintSpec],
    cfg: AnnotationConfig,
    line_index: Optional[int] = None,
) -> AnnotatedSentence:
    if cfg.scheme is Scheme.SUFFIX:
        return annotate_suffix(sentence, constraints, cfg, line_index)
    if cfg.scheme is Scheme.FACTORED:
        return annotate_factored_constraints(sentence, constraints, cfg, line_index)
    return annotate_replace_constraints(sentence, constraints, cfg, line_index)


def strip_annotation(
    tokens: Sequence[str], cfg: AnnotationConfig = AnnotationConfig()
) -> Tuple[Tokens, List[List[Tokens]]]:
    """Split a suffix-annotated token sequence back into sentence and constraints.

    Returns ``(sentence_tokens, constraints)`` where each constraint is a list
    of variants. Raises :class:`AnnotationError` on empty groups.
    """
    if cfg.scheme is not Scheme.SUFFIX:
        raise AnnotationError("only the suffix scheme can be stripped")
    tokens = tuple(tokens)
    try:
        cut = tokens.index(cfg.sep_token)
    except ValueError:
        for pos, tok in enumerate(tokens):
            if tok in (cfg.constraint_delim, cfg.variant_delim):
                raise AnnotationError(f"delimiter {tok!r} at position {pos} before any {cfg.sep_token!r}")
        return tokens, []
    constraints: List[List[Tokens]] = []
    variants: List[Tokens] = []
    cur: List[str] = []

    def close_variant(pos: int):
        if not cur:
            raise AnnotationError(f"empty constraint variant ending at position {pos}")
        variants.append(tuple(cur))
        cur.clear()

    for pos in range(cut + 1, len(tokens)):
        tok = tokens[pos]
        if tok == cfg.sep_token:
            raise AnnotationError(f"second {cfg.sep_token!r} at position {pos}")
        if tok == cfg.variant_delim:
            close_variant(pos)
        elif tok == cfg.constraint_delim:
            close_variant(pos)
            constraints.append(list(variants))
            variants.clear()
        else:
            cur.append(tok)
    close_variant(len(tokens))
    constraints.append(list(variants))
    return tokens[:cut], constraints
