"""Pluggable, context-free lemmatization.

Every token is lemmatized on its own, so the same word always receives the
same lemma whether it occurs in running text or in a term-base entry.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

from .core import ConstraintSpec, Mode, Tokens, TokenizedSentence, normalize


class LemmatizerKind(enum.Enum):
    IDENTITY = "identity"
    DICTIONARY = "dict"


class LemmaDictionaryError(ValueError):
    pass


@dataclass(frozen=True)
class LemmatizerSpec:
    kind: LemmatizerKind = LemmatizerKind.IDENTITY
    dictionary_path: Optional[str] = None
    lowercase_before_lookup: bool = True

    def __post_init__(self):
        if (self.kind is LemmatizerKind.DICTIONARY) != (self.dictionary_path is not None):
            raise ValueError("dictionary_path is required exactly for the dictionary lemmatizer")
        if self.dictionary_path is not None:
            object.__setattr__(self, "dictionary_path", str(self.dictionary_path))

    @classmethod
    def parse(cls, text: str, lowercase: bool = True) -> "LemmatizerSpec":
        """Parse the CLI form ``identity`` or ``dict:<path>``."""
        if text == "identity":
            return cls(LemmatizerKind.IDENTITY, None, lowercase)
        if text.startswith("dict:") and len(text) > 5:
            return cls(LemmatizerKind.DICTIONARY, text[5:], lowercase)
        raise ValueError(f"unknown lemmatizer {text!r} (expected identity or dict:<path>)")


@dataclass(frozen=True)
class LemmaDictionary:
    entries: Dict[str, str]
    folded: Dict[str, str]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "LemmaDictionary":
        entries: Dict[str, str] = {}
        folded: Dict[str, str] = {}
        for surface, lemma in pairs:
            entries.setdefault(surface, lemma)
            folded.setdefault(surface.lower(), lemma.lower())
        return cls(entries, folded)

    def lookup(self, word: str, lowercase: bool) -> Optional[str]:
        if lowercase:
            return self.folded.get(word.lower())
        return self.entries.get(word)


def _parse_dictionary(path: Path) -> LemmaDictionary:
    pairs = []
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LemmaDictionaryError(f"cannot read lemma dictionary {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise LemmaDictionaryError(f"{path}: not valid UTF-8") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        cols = normalize(line).split("\t")
        if len(cols) != 2:
            raise LemmaDictionaryError(f"{path}:{lineno}: expected surface<TAB>lemma")
        surface, lemma = cols[0].strip(), cols[1].strip()
        if not surface or not lemma or len(surface.split()) != 1 or len(lemma.split()) != 1:
            raise LemmaDictionaryError(f"{path}:{lineno}: entries must be single non-empty tokens")
        pairs.append((surface, lemma))
    return LemmaDictionary.from_pairs(pairs)


@functools.lru_cache(maxsize=16)
def load_dictionary(path: str) -> LemmaDictionary:
    return _parse_dictionary(Path(path))


class Lemmatizer:
    """A loaded lemmatizer; cheap to call per token and safe to share."""

    def __init__(self, spec: LemmatizerSpec, dictionary: Optional[LemmaDictionary] = None):
        self.spec = spec
        if dictionary is None and spec.kind is LemmatizerKind.DICTIONARY:
            dictionary = load_dictionary(spec.dictionary_path)
        self.dictionary = dictionary
        self._cache: Dict[str, str] = {}

    def word(self, word: str) -> str:
        lemma = self._cache.get(word)
        if lemma is None:
            lemma = self._lemmatize(word)
            if len(self._cache) < 1_000_000:
                self._cache[word] = lemma
        return lemma

    def _lemmatize(self, word: str) -> str:
        if not word:
            raise ValueError("cannot lemmatize an empty token")
        lower = self.spec.lowercase_before_lookup
        if self.dictionary is not None:
            hit = self.dictionary.lookup(word, lower)
            if hit is not None:
                return hit
        return word.lower() if lower else word

    def tokens(self, tokens: Sequence[str]) -> Tokens:
        return tuple(self.word(t) for t in tokens)

    def sentence(self, sentence: TokenizedSentence) -> TokenizedSentence:
        return TokenizedSentence(sentence.surface, self.tokens(sentence.surface))

    def constraint(self, constraint: ConstraintSpec, restore_case: bool = False) -> ConstraintSpec:
        """Lemma-mode copy of ``constraint`` (variants replaced by their lemmas)."""
        variants = []
        for variant in constraint.variants:
            lemmas = lemma_variant(self, variant, restore_case)
            if lemmas not in variants:
                variants.append(lemmas)
        return ConstraintSpec(tuple(variants), constraint.origin, Mode.LEMMA, constraint.source_span)


def lemma_variant(lem: Lemmatizer, tokens: Sequence[str], restore_case: bool) -> Tokens:
    """Lemmatize a target-side token sequence.

    With ``restore_case`` a token whose lemma differs from it only by case
    keeps its original spelling, so acronyms such as ``SARS-CoV`` are not
    turned into ``sars-cov``.
    """
    out = []
    for tok in tokens:
        lemma = lem.word(tok)
        if restore_case and lemma.lower() == tok.lower():
            lemma = tok
        out.append(lemma)
    return tuple(out)


@functools.lru_cache(maxsize=16)
def get_lemmatizer(spec: LemmatizerSpec) -> Lemmatizer:
    return Lemmatizer(spec)


def lemmatize_word(word: str, spec: LemmatizerSpec) -> str:
    return get_lemmatizer(spec).word(word)


def lemmatize_sentence(sentence: TokenizedSentence, spec: LemmatizerSpec) -> TokenizedSentence:
    return get_lemmatizer(spec).sentence(sentence)


def ensure_lemmas(sentence: TokenizedSentence, spec: LemmatizerSpec) -> TokenizedSentence:
    if sentence.lemmas is not None:
        return sentence
    return lemmatize_sentence(sentence, spec)
