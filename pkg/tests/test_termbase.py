import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_matches
from termcon.core import Mode, TokenizedSentence, pretokenize, tokenize
from termcon.lemma import LemmatizerSpec, lemmatize_sentence
from termcon.termbase import (
    MatchLevel,
    TermBase,
    TermBaseError,
    TermMatch,
    VariantPolicy,
    find_matches,
    load_termbase,
    make_entry,
    matches_to_constraints,
)

RESPIRATORY = (
    "respiratory diseases\tmaladies respiratoires\t"
    "maladies communes des voies respiratoires\tmaladie respiratoire\n"
)


def _tb(tmp_path, text, spec=LemmatizerSpec()):
    p = tmp_path / "tb.tsv"
    p.write_text(text, encoding="utf-8")
    return load_termbase(p, spec)


class TestLoad:
    def test_single_entry(self, tmp_path):
        tb = _tb(tmp_path, "runny nose\tnez qui coule\n")
        assert len(tb) == 1
        assert tb.entries[0].variants == (("nez", "qui", "coule"),)

    def test_three_variants_in_order(self, tmp_path):
        tb = _tb(tmp_path, RESPIRATORY)
        assert [len(v) for v in tb.entries[0].variants] == [2, 5, 2]
        assert tb.entries[0].variants[2] == ("maladie", "respiratoire")

    def test_empty_file(self, tmp_path):
        assert len(_tb(tmp_path, "")) == 0

    def test_missing_target_reports_line(self, tmp_path):
        with pytest.raises(TermBaseError, match=":2:"):
            _tb(tmp_path, "a\tb\nlonely\n")
        with pytest.raises(TermBaseError, match=":1:"):
            _tb(tmp_path, "a\t \n")

    def test_index_reaches_every_entry(self, tmp_path):
        tb = _tb(tmp_path, "a b\tx\na\ty\nc\tz\n")
        reach = sorted(i for ids in tb.index.values() for i in ids)
        assert reach == [0, 1, 2]
        assert all(i in tb.index[e.source_lemmas[0]] for i, e in enumerate(tb.entries))


class TestFindMatches:
    def test_fever(self, fever_sentence, fever_tb):
        ms = find_matches(fever_sentence, fever_tb, LemmatizerSpec())
        assert [(m.entry_index, m.span, m.level) for m in ms] == [
            (0, (5, 7), MatchLevel.SURFACE),
            (1, (8, 9), MatchLevel.SURFACE),
        ]

    def test_no_terms(self, fever_tb):
        assert find_matches(tokenize("nothing here"), fever_tb, LemmatizerSpec()) == []

    def test_lemma_level(self, tmp_path, french_dict):
        tb = _tb(tmp_path, "maladie grippal\tinfluenza-like illness\n", french_dict)
        ms = find_matches(lemmatize_sentence(tokenize("des maladies grippales"), french_dict), tb, french_dict)
        assert ms == [TermMatch(0, (1, 3), MatchLevel.LEMMA)]

    def test_longest_wins(self, tmp_path):
        tb = _tb(tmp_path, "runny\tx\nrunny nose\ty\n")
        ms = find_matches(tokenize("a runny nose"), tb, LemmatizerSpec())
        assert [(m.entry_index, m.span) for m in ms] == [(1, (1, 3))]

    def test_surface_beats_lemma_at_equal_length(self, tmp_path):
        tb = _tb(tmp_path, "SARS\tlemma-entry\nSars\tother\n")
        sent = tokenize("le SARS")
        ms = find_matches(sent, tb, LemmatizerSpec())
        assert ms == [TermMatch(0, (1, 2), MatchLevel.SURFACE)]
        ms = find_matches(tokenize("le Sars"), tb, LemmatizerSpec())
        assert ms == [TermMatch(1, (1, 2), MatchLevel.SURFACE)]
        ms = find_matches(tokenize("le sars"), tb, LemmatizerSpec())
        assert ms == [TermMatch(0, (1, 2), MatchLevel.LEMMA)]

    def test_case_sensitive_lemmas(self, tmp_path):
        spec = LemmatizerSpec(lowercase_before_lookup=False)
        tb = _tb(tmp_path, "SARS\tx\n", spec)
        assert find_matches(tokenize("sars"), tb, spec) == []

    def test_gapped_terms_not_matched(self, tmp_path, french_dict):
        tb = _tb(tmp_path, "maladies respiratoires\tx\n", french_dict)
        sent = tokenize("maladies transmissibles et respiratoires")
        assert find_matches(sent, tb, french_dict) == []


def _random_instance(rng):
    vocab = ["a", "b", "c", "A", "B"]
    sent = [rng.choice(vocab) for _ in range(rng.randint(0, 8))]
    lines = []
    for _ in range(rng.randint(0, 6)):
        src = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 3)))
        lines.append(f"{src}\tt{len(lines)}")
    return sent, lines


class TestAgainstOracle:
    def test_random_instances(self, tmp_path):
        rng = random.Random(7)
        spec = LemmatizerSpec()
        for case in range(300):
            sent, lines = _random_instance(rng)
            tb = _tb(tmp_path, "\n".join(lines) + "\n")
            s = lemmatize_sentence(TokenizedSentence(tuple(sent)), spec)
            got = [(m.entry_index, m.span, m.level) for m in find_matches(s, tb, spec)]
            assert got == brute_force_matches(s.surface, s.lemmas, tb), (sent, lines)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.sampled_from("abAB"), max_size=8),
        st.lists(st.lists(st.sampled_from("abAB"), min_size=1, max_size=3), max_size=6),
    )
    def test_invariants(self, sent, sources):
        spec = LemmatizerSpec()
        tb = TermBase.build([make_entry(" ".join(s), ["t"], spec) for s in sources], spec)
        s = lemmatize_sentence(TokenizedSentence(tuple(sent)), spec)
        ms = find_matches(s, tb, spec)
        spans = [m.span for m in ms]
        assert all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))
        for m in ms:
            a, b = m.span
            longer = [
                e for e in tb.entries
                if len(e.source_term) > b - a and s.lemmas[a:a + len(e.source_term)] == e.source_lemmas
            ]
            assert not longer
        assert ms == find_matches(s, tb, spec)


class TestConstraints:
    def test_first_only(self, fever_sentence, fever_tb):
        ms = find_matches(fever_sentence, fever_tb, LemmatizerSpec())
        cons = matches_to_constraints(ms[1:], fever_tb, Mode.SURFACE, VariantPolicy.FIRST_ONLY)
        assert cons[0].variants == (("fièvre",),) and cons[0].source_span == (8, 9)

    def test_all_variants_lemma_identity(self, tmp_path):
        spec = LemmatizerSpec()
        tb = _tb(tmp_path, RESPIRATORY, spec)
        ms = find_matches(pretokenize("chronic Respiratory diseases."), tb, spec)
        (c,) = matches_to_constraints(ms, tb, Mode.LEMMA, VariantPolicy.ALL)
        assert c.mode is Mode.LEMMA and c.source_span == (1, 3)
        assert c.variants == (
            ("maladies", "respiratoires"),
            ("maladies", "communes", "des", "voies", "respiratoires"),
            ("maladie", "respiratoire"),
        )

    def test_lemma_variants_collapse_when_equal(self, tmp_path, french_dict):
        # the first and third variants share a lemma sequence; duplicates are dropped
        tb = _tb(tmp_path, RESPIRATORY, french_dict)
        ms = find_matches(pretokenize("respiratory diseases"), tb, french_dict)
        (c,) = matches_to_constraints(ms, tb, Mode.LEMMA, VariantPolicy.ALL)
        assert c.variants == (
            ("maladie", "respiratoire"),
            ("maladie", "communes", "des", "voies", "respiratoire"),
        )

    def test_sars_case_restored_in_lemma_mode(self, tmp_path, french_dict):
        tb = _tb(tmp_path, "SARS-CoV\tSARS-CoV\n", french_dict)
        ms = find_matches(tokenize("le SARS-CoV"), tb, french_dict)
        assert ms[0].level is MatchLevel.SURFACE
        (kept,) = matches_to_constraints(ms, tb, Mode.LEMMA)
        (lowered,) = matches_to_constraints(ms, tb, Mode.LEMMA, restore_case=False)
        assert kept.variants == (("SARS-CoV",),)
        assert lowered.variants == (("sars-cov",),)

    def test_bad_entry_index(self, fever_tb):
        with pytest.raises(IndexError):
            matches_to_constraints([TermMatch(9, (0, 1), MatchLevel.SURFACE)], fever_tb)
