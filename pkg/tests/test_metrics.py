import json
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fixtures as fx
from oracles import exhaustive_ter_cost, weighted_ed
from termcon.core import tokenize
from termcon.lemma import LemmatizerSpec
from termcon.metrics import (
    EvalConfig,
    TermWeights,
    corpus_bleu,
    evaluate,
    exact_match,
    sentence_stats,
    ter,
    ter_stats,
    term_weights_for,
    window_overlap,
)


class TestBleu:
    def test_identical(self):
        assert corpus_bleu(["a b c d e"], ["a b c d e"]) == pytest.approx(100.0)

    def test_short_hypothesis_hand_computed(self):
        # precisions 3/3, 2/2, 1/1 and no 4-grams (epsilon over a unit denominator)
        expected = 100 * math.exp(1 - 4 / 3) * (1e-9) ** 0.25
        assert corpus_bleu(["the cat sat"], ["the cat sat down"]) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.40293, abs=1e-5)

    def test_disjoint(self):
        assert corpus_bleu(["a b c d"], ["e f g h"]) < 1e-6

    def test_errors(self):
        with pytest.raises(ValueError):
            corpus_bleu([], [])
        with pytest.raises(ValueError):
            corpus_bleu(["a"], ["a", "b"])

    def test_clipping(self):
        st_ = sentence_stats("the the the", "the cat")
        assert st_[0] == 1 and st_[4] == 3

    @given(st.lists(st.tuples(st.text("abc ", max_size=12), st.text("abc ", max_size=12)), min_size=1, max_size=6),
           st.randoms())
    def test_permutation_invariant(self, pairs, rnd):
        shuffled = list(pairs)
        rnd.shuffle(shuffled)
        a = corpus_bleu([h for h, _ in pairs], [r for _, r in pairs])
        b = corpus_bleu([h for h, _ in shuffled], [r for _, r in shuffled])
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


class TestExactMatch:
    def test_862_of_872(self):
        res = exact_match(fx.em_862_of_872())
        assert (res.covered, res.total) == (862, 872)
        assert round(res.score, 3) == 0.989

    def test_lowercased_lemma_hit(self):
        inst = fx.instance("Coronavirus is spreading", "coronavirus is spreading", fx.term("coronavirus"))
        assert exact_match([inst]).score == 1.0
        strict = LemmatizerSpec(lowercase_before_lookup=False)
        assert exact_match([inst], strict).score == 0.0

    def test_any_variant(self):
        inst = fx.instance("des maladies communes", "x", fx.term("maladie respiratoire", "maladies communes"))
        assert exact_match([inst]).score == 1.0

    def test_no_terms(self, caplog):
        res = exact_match([fx.instance("a", "a")])
        assert res.score == 1.0 and res.no_terms
        assert "no expected terms" in caplog.text

    def test_duplicates_counted(self):
        inst = fx.instance("fever", "fever", fx.term("fever"), fx.term("fever"))
        assert exact_match([inst]).total == 2
        assert exact_match([inst], dedupe_terms=True).total == 1

    @settings(max_examples=50)
    @given(st.lists(st.sampled_from("abcd"), max_size=6), st.sampled_from("abcd"))
    def test_monotone(self, hyp, extra):
        terms = [fx.term(w) for w in "abcd"]
        before = exact_match([fx.instance(" ".join(hyp) or "z", "z", *terms)]).score
        after = exact_match([fx.instance(" ".join(hyp + [extra]), "z", *terms)]).score
        assert after >= before


class TestWindow:
    def test_identical(self):
        assert window_overlap(fx.PERFECT, 2) == 1.0

    def test_appended_term_scores_zero(self):
        inst = fx.instance(
            "the doctor said hello to me fièvre",
            "he has a fièvre since monday",
            fx.term("fièvre"),
        )
        assert window_overlap([inst], 2) == 0.0

    def test_missing_in_hypothesis_scores_zero(self):
        inst = fx.instance("a b c", "a fever c", fx.term("fever"))
        assert window_overlap([inst], 2) == 0.0

    def test_absent_from_reference_skipped(self):
        skipped = fx.instance("a fever b", "a b", fx.term("fever"))
        scored = fx.instance("a fever b", "a fever b", fx.term("fever"))
        assert window_overlap([skipped, scored], 3) == 1.0

    def test_fixture_values(self):
        assert window_overlap(fx.THREE_SENTENCES, 2) == pytest.approx(fx.THREE_WINDOW2, abs=1e-12)
        assert window_overlap(fx.THREE_SENTENCES, 3) == pytest.approx(fx.THREE_WINDOW3, abs=1e-12)

    def test_bad_size(self):
        with pytest.raises(ValueError):
            window_overlap(fx.PERFECT, 0)


class TestWeights:
    def test_no_terms(self):
        assert term_weights_for(tokenize("a b"), []).tolist() == [1.0, 1.0]

    def test_two_token_term(self):
        w = term_weights_for(tokenize("a runny nose b c"), [fx.term("runny nose")])
        assert w.tolist() == [1, 2, 2, 1, 1]

    def test_overlapping_hits_union(self):
        w = term_weights_for(tokenize("x a b c y"), [fx.term("a b", "b c")], TermWeights(1.0, 3.0))
        assert w.tolist() == [1, 3, 3, 3, 1]

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            TermWeights(2.0, 1.0)


class TestTer:
    def test_identical(self):
        assert ter(tokenize("a b c"), tokenize("a b c")) == 0.0

    def test_swap_is_one_shift(self):
        st_ = ter_stats(("b", "a"), ("a", "b"))
        assert st_.shifts == 1 and st_.score == 0.5

    def test_weighted_substitution(self):
        # ref has one term token (weight 2); substituting it costs 2 over weight 5
        assert ter(("a", "b", "X", "d"), ("a", "b", "c", "d"), [1, 1, 1, 1], [1, 1, 2, 1]) == pytest.approx(0.4)

    def test_insert_and_delete_costs(self):
        assert ter_stats(("a", "b", "z"), ("a", "b"), [1, 1, 3], [1, 1]).cost == 3
        assert ter_stats(("a",), ("a", "z"), [1], [1, 4]).cost == 4

    def test_empty_reference_flagged(self):
        st_ = ter_stats(("a", "b"), ())
        assert st_.flagged and st_.score == 2.0
        assert ter_stats((), ()).score == 0.0

    def test_weight_length_checked(self):
        with pytest.raises(ValueError):
            ter_stats(("a",), ("a",), [1, 1], [1])
        with pytest.raises(ValueError):
            ter_stats(("a",), ("a",), [0], [1])

    def test_against_oracle(self):
        rng = random.Random(3)
        for _ in range(300):
            v = rng.randint(2, 5)
            h = tuple(str(rng.randrange(v)) for _ in range(rng.randint(0, 6)))
            r = tuple(str(rng.randrange(v)) for _ in range(rng.randint(1, 6)))
            oracle = exhaustive_ter_cost(h, r)
            greedy = ter_stats(h, r).cost
            assert greedy >= oracle - 1e-9
            if oracle == weighted_ed(tuple((x, 1.0) for x in h), tuple((x, 1.0) for x in r)):
                assert greedy == pytest.approx(oracle)

    def test_weighted_never_undercuts_oracle(self):
        rng = random.Random(4)
        for _ in range(150):
            h = tuple(rng.choice("abc") for _ in range(rng.randint(1, 5)))
            r = tuple(rng.choice("abc") for _ in range(rng.randint(1, 5)))
            hw = [rng.choice([1.0, 2.0]) for _ in h]
            rw = [rng.choice([1.0, 2.0]) for _ in r]
            assert ter_stats(h, r, hw, rw).cost >= exhaustive_ter_cost(h, r, hw, rw) - 1e-9

    @settings(max_examples=80, deadline=None)
    @given(
        st.lists(st.sampled_from("abcd"), max_size=7),
        st.lists(st.sampled_from("abcd"), min_size=1, max_size=7),
        st.floats(0.1, 10),
    )
    def test_scale_invariant_and_nonnegative(self, h, r, k):
        rng = np.random.default_rng(len(h) * 31 + len(r))
        hw = rng.choice([1.0, 2.0], len(h))
        rw = rng.choice([1.0, 2.0], len(r))
        a = ter(h, r, hw, rw, shift_cost=1.0)
        b = ter(h, r, hw * k, rw * k, shift_cost=k)
        assert a >= 0 and a == pytest.approx(b, rel=1e-9, abs=1e-12)
        assert ter(r, r, rw, rw) == 0.0


class TestReport:
    def test_three_sentence_fixture(self):
        rep = evaluate(fx.THREE_SENTENCES)
        assert rep.bleu == pytest.approx(fx.THREE_BLEU, abs=5e-7)
        assert rep.exact_match == pytest.approx(fx.THREE_EM, abs=5e-7)
        assert rep.window2 == pytest.approx(fx.THREE_WINDOW2, abs=5e-7)
        assert rep.window3 == pytest.approx(fx.THREE_WINDOW3, abs=5e-7)
        assert rep.one_minus_term == pytest.approx(fx.THREE_ONE_MINUS_TERM, abs=5e-7)
        assert rep.counts["terms_total"] == 4 and rep.counts["terms_covered"] == 3

    def test_perfect(self):
        rep = evaluate(fx.PERFECT)
        assert rep.summary() == {"BLEU": 100.0, "EM": 1.0, "window 2": 1.0, "window 3": 1.0, "1-TERm": 1.0}

    def test_json(self):
        doc = json.loads(evaluate(fx.THREE_SENTENCES).to_json())
        assert set(doc) >= {"bleu", "exact_match", "window2", "window3", "one_minus_term", "per_sentence"}
        assert len(doc["per_sentence"]["term"]) == 3

    def test_term_below_zero_possible(self):
        rep = evaluate([fx.instance("x y z w v", "a")])
        assert rep.one_minus_term < 0

    def test_shift_cost_knob(self):
        cheap = evaluate(fx.THREE_SENTENCES, EvalConfig(shift_cost=0.5)).one_minus_term
        assert cheap > fx.THREE_ONE_MINUS_TERM

    def test_empty(self):
        with pytest.raises(ValueError):
            evaluate([])
