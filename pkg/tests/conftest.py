import pytest

from termcon.core import pretokenize
from termcon.lemma import LemmatizerSpec
from termcon.termbase import load_termbase

FEVER_LINE = "And are you having a runny nose or fever?"


@pytest.fixture
def fever_sentence():
    return pretokenize(FEVER_LINE)


@pytest.fixture
def fever_tb_path(tmp_path):
    p = tmp_path / "tb.tsv"
    p.write_text("runny nose\tnez qui coule\nfever\tfièvre\n", encoding="utf-8")
    return p


@pytest.fixture
def fever_tb(fever_tb_path):
    return load_termbase(fever_tb_path, LemmatizerSpec())


@pytest.fixture
def french_dict(tmp_path):
    p = tmp_path / "lemmas.tsv"
    p.write_text(
        "maladies\tmaladie\n"
        "grippales\tgrippal\n"
        "grippale\tgrippe\n"
        "respiratoires\trespiratoire\n"
        "SARS\tSars\n"
        "Maladies\tMALADIE\n",
        encoding="utf-8",
    )
    return LemmatizerSpec.parse(f"dict:{p}")
