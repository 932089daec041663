"""Shared domain types, whitespace tokenization and parallel-corpus readers."""

from __future__ import annotations

import contextlib
import enum
import itertools
import sys
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Dict, Iterator, List, Optional, Sequence, Tuple

Tokens = Tuple[str, ...]
Span = Tuple[int, int]


class Origin(enum.Enum):
    SAMPLED = "sampled"
    TERMBASE = "termbase"
    # supplied from outside (sidecar files, expected terms for evaluation)
    PROVIDED = "provided"


class Mode(enum.Enum):
    SURFACE = "surface"
    LEMMA = "lemma"


@dataclass(frozen=True)
class TokenizedSentence:
    surface: Tokens
    lemmas: Optional[Tokens] = None

    def __post_init__(self):
        if not isinstance(self.surface, tuple):
            object.__setattr__(self, "surface", tuple(self.surface))
        if self.lemmas is not None and not isinstance(self.lemmas, tuple):
            object.__setattr__(self, "lemmas", tuple(self.lemmas))
        # one split per sentence catches both empty tokens and embedded whitespace
        if len(" ".join(self.surface).split()) != len(self.surface):
            raise ValueError(f"empty or whitespace-bearing token in {self.surface!r}")
        if self.lemmas is not None and len(self.lemmas) != len(self.surface):
            raise ValueError(
                f"lemma count {len(self.lemmas)} != token count {len(self.surface)}"
            )

    def __len__(self) -> int:
        return len(self.surface)


@dataclass(frozen=True)
class SentencePair:
    source: TokenizedSentence
    target: TokenizedSentence
    line_index: int

    def __post_init__(self):
        if self.line_index < 0:
            raise ValueError("line_index must be non-negative")


@dataclass(frozen=True)
class ConstraintSpec:
    """One constraint attached to a sentence.

    ``variants`` is ordered: the first entry is the preferred (or, for
    sampled constraints, the true) translation.
    """

    variants: Tuple[Tokens, ...]
    origin: Origin
    mode: Mode = Mode.SURFACE
    source_span: Optional[Span] = None

    def __post_init__(self):
        variants = tuple(tuple(v) for v in self.variants)
        object.__setattr__(self, "variants", variants)
        if not variants:
            raise ValueError("constraint needs at least one variant")
        if any(len(v) == 0 for v in variants):
            raise ValueError("empty constraint variant")
        if len(set(variants)) != len(variants):
            raise ValueError(f"duplicate variants in {variants!r}")
        has_span = self.source_span is not None
        if has_span != (self.origin is Origin.TERMBASE):
            raise ValueError("source_span is required exactly for term-base constraints")
        if has_span:
            start, end = self.source_span
            if not 0 <= start < end:
                raise ValueError(f"invalid source span {self.source_span!r}")
            object.__setattr__(self, "source_span", (int(start), int(end)))


@dataclass(frozen=True)
class AnnotatedSentence:
    source: TokenizedSentence
    constraints: Tuple[ConstraintSpec, ...] = ()
    factors: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.factors is not None:
            object.__setattr__(self, "factors", tuple(self.factors))
            if len(self.factors) != len(self.source):
                raise ValueError("factors must be parallel to source tokens")
            if any(f not in (0, 1, 2) for f in self.factors):
                raise ValueError("factor values must be 0, 1 or 2")
        starts = [c.source_span[0] for c in self.constraints if c.source_span is not None]
        if starts != sorted(starts):
            raise ValueError("constraints must be ordered by source span")

    def to_line(self) -> str:
        if self.factors is None:
            return " ".join(self.source.surface)
        return " ".join(f"{tok}|{f}" for tok, f in zip(self.source.surface, self.factors))


def normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def tokenize(text: str) -> TokenizedSentence:
    """Split a single line on unicode whitespace after NFC normalization."""
    if "\n" in text or "\r" in text:
        raise ValueError("tokenize expects a single line")
    return TokenizedSentence(tuple(normalize(text).split()))


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def pretokenize(text: str) -> TokenizedSentence:
    """Whitespace tokenization that also detaches leading/trailing punctuation.

    Word-internal punctuation is kept, so ``SARS-CoV`` and ``2018-2019`` stay
    whole while ``fever?`` becomes ``fever ?``.
    """
    out = []
    for tok in tokenize(text).surface:
        lo, hi = 0, len(tok)
        while lo < hi and _is_punct(tok[lo]):
            lo += 1
        while hi > lo and _is_punct(tok[hi - 1]):
            hi -= 1
        out.extend(tok[:lo])
        if lo < hi:
            out.append(tok[lo:hi])
        out.extend(tok[hi:])
    return TokenizedSentence(tuple(out))


def detokenize(sentence: TokenizedSentence | Sequence[str]) -> str:
    tokens = sentence.surface if isinstance(sentence, TokenizedSentence) else sentence
    return " ".join(tokens)


# -- corpus I/O --------------------------------------------------------------


@contextlib.contextmanager
def open_text(path: Optional[str | Path], mode: str = "r") -> Iterator[IO[str]]:
    """Open a UTF-8 text file, or stdin/stdout for ``None`` or ``-`` (left open)."""
    if path is None or str(path) == "-":
        stream = sys.stdin if "r" in mode else sys.stdout
        yield stream
        if "r" not in mode:
            stream.flush()
        return
    with open(path, mode, encoding="utf-8", newline="\n") as fh:
        yield fh


def iter_lines(stream: IO[str]) -> Iterator[str]:
    for line in stream:
        yield line.rstrip("\n").rstrip("\r")


def read_parallel(
    source: Optional[str | Path] = None,
    target: Optional[str | Path] = None,
    tsv: Optional[str | Path] = None,
) -> Iterator[SentencePair]:
    """Yield sentence pairs from two aligned files or one ``src<TAB>tgt`` file.

    With no paths at all the TSV form is read from stdin.
    """
    if source is not None or target is not None:
        if source is None or target is None:
            raise ValueError("both source and target paths are required")
        with open_text(source) as fs, open_text(target) as ft:
            pairs = itertools.zip_longest(iter_lines(fs), iter_lines(ft))
            for idx, (s, t) in enumerate(pairs):
                if s is None or t is None:
                    raise ValueError(f"line {idx + 1}: source and target differ in length")
                yield SentencePair(tokenize(s), tokenize(t), idx)
        return
    with open_text(tsv) as stream:
        for idx, line in enumerate(iter_lines(stream)):
            src, sep, tgt = line.partition("\t")
            if not sep:
                raise ValueError(f"line {idx + 1}: expected source<TAB>target")
            yield SentencePair(tokenize(src), tokenize(tgt), idx)


# -- per-line constraint sidecar: ``line_index<TAB>v1|v2<TAB>...`` ---------------


def format_sidecar_line(line_index: int, constraints: Sequence[ConstraintSpec]) -> str:
    fields = ["|".join(" ".join(v) for v in c.variants) for c in constraints]
    return "\t".join([str(line_index)] + fields)


def parse_sidecar_line(line: str, mode: Mode = Mode.SURFACE) -> Tuple[int, List[ConstraintSpec]]:
    cols = line.rstrip("\n").split("\t")
    try:
        idx = int(cols[0])
    except ValueError:
        raise ValueError(f"bad line index {cols[0]!r}") from None
    constraints = []
    for col in cols[1:]:
        variants = []
        for v in col.split("|"):
            toks = tokenize(v).surface
            if toks and toks not in variants:
                variants.append(toks)
        if variants:
            constraints.append(ConstraintSpec(tuple(variants), Origin.PROVIDED, mode))
    return idx, constraints


def read_sidecar(
    path: str | Path, num_lines: Optional[int] = None, mode: Mode = Mode.SURFACE
) -> List[List[ConstraintSpec]]:
    """Read a sidecar into a per-line list; lines without an entry get no terms."""
    table: Dict[int, List[ConstraintSpec]] = {}
    with open_text(path) as fh:
        for lineno, line in enumerate(iter_lines(fh), 1):
            if not line.strip():
                continue
            try:
                idx, cons = parse_sidecar_line(line, mode)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            if idx < 0:
                raise ValueError(f"{path}:{lineno}: negative line index")
            table.setdefault(idx, []).extend(cons)
    size = num_lines if num_lines is not None else (max(table) + 1 if table else 0)
    if table and max(table) >= size:
        raise ValueError(f"{path}: line index {max(table)} beyond corpus of {size} lines")
    return [table.get(i, []) for i in range(size)]
