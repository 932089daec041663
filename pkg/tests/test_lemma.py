import pytest
from hypothesis import given
from hypothesis import strategies as st

from termcon.core import ConstraintSpec, Mode, Origin, tokenize
from termcon.lemma import (
    LemmaDictionaryError,
    LemmatizerKind,
    LemmatizerSpec,
    Lemmatizer,
    lemma_variant,
    lemmatize_sentence,
    lemmatize_word,
)

words = st.text(alphabet="abcABCéÉ-", min_size=1, max_size=8)


class TestSpec:
    def test_parse(self):
        assert LemmatizerSpec.parse("identity").kind is LemmatizerKind.IDENTITY
        spec = LemmatizerSpec.parse("dict:/x/y.tsv", lowercase=False)
        assert spec.dictionary_path == "/x/y.tsv" and not spec.lowercase_before_lookup

    @pytest.mark.parametrize("text", ["", "dict:", "udpipe"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            LemmatizerSpec.parse(text)

    def test_path_iff_dictionary(self):
        with pytest.raises(ValueError):
            LemmatizerSpec(LemmatizerKind.DICTIONARY)
        with pytest.raises(ValueError):
            LemmatizerSpec(LemmatizerKind.IDENTITY, "x")


class TestWord:
    def test_dictionary_hit(self, french_dict):
        assert lemmatize_word("grippale", french_dict) == "grippe"

    def test_identity(self):
        assert lemmatize_word("fever", LemmatizerSpec()) == "fever"
        assert lemmatize_word("Fever", LemmatizerSpec()) == "fever"
        assert lemmatize_word("Fever", LemmatizerSpec(lowercase_before_lookup=False)) == "Fever"

    def test_oov_falls_back_to_lowercase(self, french_dict):
        assert lemmatize_word("COVID", french_dict) == "covid"

    def test_lookup_is_case_folded(self, french_dict):
        # dictionary values are folded too, so SARS -> sars, Maladies -> maladie
        assert lemmatize_word("SARS", french_dict) == "sars"
        assert lemmatize_word("MALADIES", french_dict) == "maladie"

    def test_case_sensitive_lookup(self, french_dict):
        spec = LemmatizerSpec(french_dict.kind, french_dict.dictionary_path, False)
        assert lemmatize_word("SARS", spec) == "Sars"
        assert lemmatize_word("Maladies", spec) == "MALADIE"
        assert lemmatize_word("GRIPPALE", spec) == "GRIPPALE"

    def test_first_binding_wins(self, tmp_path):
        p = tmp_path / "d.tsv"
        p.write_text("vu\tvoir\nvu\tvue\n", encoding="utf-8")
        assert lemmatize_word("vu", LemmatizerSpec.parse(f"dict:{p}")) == "voir"

    def test_empty_word(self):
        with pytest.raises(ValueError):
            Lemmatizer(LemmatizerSpec()).word("")

    @pytest.mark.parametrize("content", ["a\n", "a\tb\tc\n", "a b\tc\n"])
    def test_malformed_dictionary(self, tmp_path, content):
        p = tmp_path / "bad.tsv"
        p.write_text(content, encoding="utf-8")
        with pytest.raises(LemmaDictionaryError, match=":1:"):
            Lemmatizer(LemmatizerSpec.parse(f"dict:{p}")).word("a")

    def test_missing_dictionary(self, tmp_path):
        with pytest.raises(LemmaDictionaryError):
            Lemmatizer(LemmatizerSpec.parse(f"dict:{tmp_path / 'nope.tsv'}"))


class TestSentence:
    def test_empty(self):
        out = lemmatize_sentence(tokenize(""), LemmatizerSpec())
        assert out.surface == () and out.lemmas == ()

    def test_dictionary(self, french_dict):
        out = lemmatize_sentence(tokenize("les maladies respiratoires"), french_dict)
        assert out.lemmas == ("les", "maladie", "respiratoire")

    @given(st.lists(words, max_size=10))
    def test_identity_lowercases(self, toks):
        out = lemmatize_sentence(tokenize(" ".join(toks)), LemmatizerSpec())
        assert out.lemmas == tuple(t.lower() for t in out.surface)

    @given(st.lists(words, min_size=1, max_size=6), st.integers(0, 5))
    def test_context_free(self, toks, k):
        spec = LemmatizerSpec()
        full = lemmatize_sentence(tokenize(" ".join(toks)), spec).lemmas
        assert full[k % len(toks)] == lemmatize_word(toks[k % len(toks)], spec)

    @given(st.lists(words, max_size=6))
    def test_identity_idempotent(self, toks):
        spec = LemmatizerSpec()
        once = lemmatize_sentence(tokenize(" ".join(toks)), spec).lemmas
        twice = lemmatize_sentence(tokenize(" ".join(once)), spec).lemmas
        assert once == twice


class TestConstraint:
    def test_restore_case_keeps_acronym(self, french_dict):
        lem = Lemmatizer(french_dict)
        assert lemma_variant(lem, ("SARS-CoV",), True) == ("SARS-CoV",)
        assert lemma_variant(lem, ("SARS-CoV",), False) == ("sars-cov",)
        # a real lemma change is still applied
        assert lemma_variant(lem, ("maladies",), True) == ("maladie",)

    def test_constraint_dedupes_variants(self, french_dict):
        c = ConstraintSpec((("maladies",), ("maladie",)), Origin.PROVIDED)
        out = Lemmatizer(french_dict).constraint(c)
        assert out.variants == (("maladie",),) and out.mode is Mode.LEMMA
