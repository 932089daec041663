"""Hand-worked metric fixtures shared by the unit and acceptance tests."""

import math

from termcon.core import ConstraintSpec, Origin, tokenize
from termcon.metrics import EvalInstance


def term(*variants):
    return ConstraintSpec(tuple(tuple(v.split()) for v in variants), Origin.PROVIDED)


def instance(hyp, ref, *terms, src="x"):
    return EvalInstance(tokenize(src), tokenize(hyp), tokenize(ref), tuple(terms))


THREE_SENTENCES = [
    instance("the patient has fever today", "the patient has a fever today", term("fever")),
    instance("soap wash your hands", "wash your hands with soap", term("soap")),
    instance("a common runny nose", "the runny nose is common", term("runny nose"), term("fièvre")),
]

# n-gram matches/totals counted by hand per order: (12/13, 6/10, 2/7, 0/4),
# hypothesis length 13, reference length 16; zero matches become 1e-9
THREE_BLEU = 100 * math.exp(1 - 16 / 13) * ((12 / 13) * (6 / 10) * (2 / 7) * (1e-9 / 4)) ** 0.25

# fever, soap and runny nose are produced; fièvre is not
THREE_EM = 3 / 4

# window 2 per located term: fever 2/3, soap 0/2, runny nose 1/3
THREE_WINDOW2 = (2 / 3 + 0 + 1 / 3) / 3

# window 3: fever 3/4, soap 2/3, runny nose 1/3
THREE_WINDOW3 = (3 / 4 + 2 / 3 + 1 / 3) / 3

# weighted edits: delete "a" (1); shift soap (1) + delete "with" (1);
# shift common (1) + substitute a/the (1) + delete "is" (1).
# reference weights with terms at 2.0: 7 + 6 + 7
THREE_ONE_MINUS_TERM = 1 - (1 + 2 + 3) / (7 + 6 + 7)

PERFECT = [
    instance("the patient has a fever today", "the patient has a fever today", term("fever")),
    instance("wash your hands with soap", "wash your hands with soap", term("soap"), term("hands")),
    instance("the runny nose is common", "the runny nose is common", term("runny nose")),
]


def em_862_of_872():
    """872 term instances over 109 sentences; the first 10 sentences each drop one."""
    out = []
    for k in range(109):
        words = [f"t{k}_{j}" for j in range(8)]
        hyp = words[:-1] if k < 10 else words
        out.append(instance(" ".join(hyp), " ".join(words), *(term(w) for w in words)))
    return out


# four systems (validation BLEU in brackets) over five lines
SYSTEM_LINES = {
    "A": (40.0, ["a0", "il a de la température", "le virus", "nez qui coule et fièvre", "il tousse"]),
    "B": (38.0, ["b0", "il a chaud", "le virus corona", "nez qui coule", "une toux sèche"]),
    "C": (35.0, ["c0", "il a de la Fièvre", "un virus", "fièvre", "toux"]),
    "base": (30.0, ["base0", "x", "y", "z", "w"]),
}
SYSTEM_TERMS = [
    [],
    [term("fièvre")],
    [term("coronavirus")],
    [term("nez qui coule"), term("fièvre")],
    [term("toux")],
]
# line 0: vacuous, top system; line 1: only C; line 2: nobody, baseline;
# line 3: A covers both; line 4: B outranks C
SYSTEM_CHOICE = ["A", "C", "base", "A", "B"]


def systems():
    from termcon.combine import SystemOutput

    return [
        SystemOutput(sid, bleu, tuple(tokenize(line) for line in lines))
        for sid, (bleu, lines) in SYSTEM_LINES.items()
    ]
