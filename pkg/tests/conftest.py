import datetime as dt

import numpy as np
import pytest

from rumorspread.features import RumorRecord, SentimentSeries
from rumorspread.influence import SearchSeries

KOO_OUTBREAK = dt.date(2020, 1, 26)
KOO_WEEK = (13850, 10584, 10278, 12281, 10105, 8738, 10548)
KOO_START = dt.date(2019, 11, 1)


def _constant_then(entity, level, tail=()):
    n_base = (KOO_OUTBREAK - KOO_START).days - len(tail)
    f = np.concatenate([np.full(n_base, float(level)), np.asarray(tail, dtype=float),
                        np.full(10, float(level))])
    return SearchSeries(entity, KOO_START, f)


def koo_fixture():
    """Record, series and sentiment reproducing the worked feature example."""
    record = RumorRecord(
        id="koo",
        text="Louis Koo donated 10 million yuan to Wuhan",
        fundamental_entity="Louis Koo",
        top1_entity="Wuhan",
        top2_entity="donated",
        outbreak_date=KOO_OUTBREAK,
        ner_flags={"PER": True, "ORG": False, "LOC": True, "NZ": False, "N": False, "V": True},
        resulting_amount=224_000,
    )
    key = _constant_then("Louis Koo", 11_000, KOO_WEEK)
    top1 = _constant_then("Wuhan", 2_200_000)
    top2 = _constant_then("donated", 800)
    days = tuple(dt.date(2020, 1, 1) + dt.timedelta(days=k) for k in range(60))
    values = np.zeros(60)
    values[days.index(KOO_OUTBREAK)] = 0.0032
    return record, key, top1, top2, SentimentSeries(days, values)


@pytest.fixture
def koo():
    return koo_fixture()


@pytest.fixture
def corpus_dir(tmp_path):
    from rumorspread.synthetic import make_corpus

    root = tmp_path / "corpus"
    make_corpus(root, n_rumors=30, seed=0, flat=(3,))
    return root


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
