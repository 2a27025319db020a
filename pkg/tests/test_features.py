import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rumorspread.errors import (ClampWarning, DateNotCovered, EmptyWindow, FeatureError, TooFewRows,
                                WindowOutOfRange, ZeroTraffic)
from rumorspread.features import (ALL_FEATURES, SFR_NAMES, NormRanges, RumorRecord, SentimentSeries,
                                  build_features, feature_matrix, historical_awareness,
                                  locate_sentiment, minmax_normalize, read_feature_csv,
                                  sfr_has_zero, sfr_sequence, write_feature_csv)
from rumorspread.influence import SearchSeries

from conftest import KOO_OUTBREAK, KOO_WEEK

D0 = dt.date(2020, 1, 1)


def series(values, start=D0, entity="x"):
    return SearchSeries(entity, start, np.asarray(values, dtype=float))


class TestAwareness:
    def test_constant(self):
        s = series([11000] * 10)
        assert historical_awareness(s, (D0, D0 + dt.timedelta(9))) == pytest.approx(math.log(11000))

    def test_ones(self):
        assert historical_awareness(series([1] * 3), (D0, D0 + dt.timedelta(2))) == 0.0

    def test_mean_then_log(self):
        got = historical_awareness(series([2, 4, 6]), (D0, D0 + dt.timedelta(2)))
        assert got == pytest.approx(math.log(4), abs=1e-15)

    def test_zero_traffic(self):
        with pytest.raises(ZeroTraffic):
            historical_awareness(series([0, 0, 0]), (D0, D0 + dt.timedelta(2)))

    def test_empty_window(self):
        with pytest.raises(EmptyWindow):
            historical_awareness(series([1, 2]), (D0 + dt.timedelta(5), D0 + dt.timedelta(8)))

    def test_partial_cover(self):
        with pytest.raises(WindowOutOfRange):
            historical_awareness(series([1, 2]), (D0, D0 + dt.timedelta(5)))


class TestSfr:
    def test_worked_week(self):
        s = series(list(KOO_WEEK) + [50000], start=KOO_OUTBREAK - dt.timedelta(7))
        np.testing.assert_array_equal(sfr_sequence(s, KOO_OUTBREAK), np.log(KOO_WEEK))
        assert sfr_sequence(s, KOO_OUTBREAK)[-1] == math.log(10548)

    def test_all_ones(self):
        s = series([1] * 8)
        np.testing.assert_array_equal(sfr_sequence(s, D0 + dt.timedelta(7)), np.zeros(7))

    def test_too_early(self):
        with pytest.raises(WindowOutOfRange):
            sfr_sequence(series([1] * 10), D0 + dt.timedelta(3))

    def test_zero_day_flagged(self):
        s = series([5, 0, 5, 5, 5, 5, 5, 5])
        out = D0 + dt.timedelta(7)
        assert sfr_sequence(s, out)[1] == 0.0
        assert sfr_has_zero(s, out)


class TestSentiment:
    sent = SentimentSeries((D0, D0 + dt.timedelta(1), D0 + dt.timedelta(2)), np.array([0.1, -0.2, 0.3]))

    def test_first_date(self):
        assert locate_sentiment(self.sent, D0) == 0.1

    def test_before_start(self):
        with pytest.raises(DateNotCovered):
            locate_sentiment(self.sent, D0 - dt.timedelta(1))

    def test_unordered_rejected(self):
        with pytest.raises(ValueError):
            SentimentSeries((D0 + dt.timedelta(1), D0), np.array([0.0, 0.0]))


class TestBuild:
    def test_worked_vector(self, koo):
        record, key, top1, top2, sent = koo
        v = build_features(record, key, top1, top2, sent)
        assert (v.per, v.org, v.loc, v.nz, v.n_flag, v.v_flag) == (1, 0, 1, 0, 0, 1)
        assert v.top2 == pytest.approx(math.log(800), abs=1e-9)
        assert v.top1 == pytest.approx(math.log(2_200_000), abs=1e-9)
        assert v.key_awareness == pytest.approx(math.log(11_000), abs=1e-9)
        assert v.ra == pytest.approx(math.log(224_000), abs=1e-9)
        assert v.pe == 0.0032
        np.testing.assert_allclose(v.sfr, np.log(KOO_WEEK), atol=1e-9, rtol=0)
        assert not v.zero_traffic

    def test_deterministic(self, koo):
        assert build_features(*koo) == build_features(*koo)

    def test_result_count_of_one(self, koo):
        record, *rest = koo
        rec = RumorRecord(**{**record.__dict__, "resulting_amount": 1})
        assert build_features(rec, *rest).ra == 0.0

    def test_missing_series_names_rumor(self, koo):
        record, key, _, top2, sent = koo
        with pytest.raises(FeatureError, match="koo"):
            build_features(record, key, None, top2, sent)

    def test_sentiment_gap_names_rumor(self, koo):
        record, key, top1, top2, _ = koo
        sent = SentimentSeries((D0,), np.array([0.0]))
        with pytest.raises(FeatureError) as info:
            build_features(record, key, top1, top2, sent)
        assert info.value.rumor_id == "koo"

    def test_column_order(self, koo):
        _, names = feature_matrix([build_features(*koo)])
        assert tuple(names) == ALL_FEATURES
        assert names.index("SFR-1") == names.index(SFR_NAMES[-1])

    def test_csv_round_trip(self, koo, tmp_path):
        record, *rest = koo
        v = build_features(record.with_labels(-0.6, 10.7, 22653.0), *rest)
        write_feature_csv([v, v], tmp_path / "f.csv")
        table = read_feature_csv(tmp_path / "f.csv")
        assert table.ids == ["koo", "koo"]
        X, _ = feature_matrix([v, v])
        np.testing.assert_array_equal(table.X, X)
        assert table.target("a").tolist() == [-0.6, -0.6]


class TestMinMax:
    def test_simple_column(self):
        Z, _ = minmax_normalize(np.array([[0.0], [5.0], [10.0]]))
        np.testing.assert_array_equal(Z[:, 0], [0, 0.5, 1])

    def test_constant_column(self):
        Z, r = minmax_normalize(np.array([[3.0, 1.0], [3.0, 2.0], [3.0, 3.0]]))
        np.testing.assert_array_equal(Z[:, 0], 0.0)
        assert r.constant.tolist() == [True, False]

    def test_heldout_clamps_with_warning(self):
        _, r = minmax_normalize(np.array([[0.0], [10.0]]))
        with pytest.warns(ClampWarning):
            Z, _ = minmax_normalize(np.array([[15.0], [-1.0]]), r)
        assert Z[:, 0].tolist() == [1.0, 0.0]

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            minmax_normalize(np.array([[1.0, 2.0]]))

    def test_ranges_serialize(self):
        _, r = minmax_normalize(np.array([[0.0, 4.0], [2.0, 8.0]]))
        again = NormRanges.from_dict(r.to_dict())
        np.testing.assert_array_equal(again.mins, r.mins)
        np.testing.assert_array_equal(again.maxs, r.maxs)

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(2, 20), st.integers(1, 5)),
                  elements=st.floats(-1e6, 1e6)))
    def test_bounded_and_idempotent(self, X):
        Z, _ = minmax_normalize(X)
        assert Z.min() >= 0.0 and Z.max() <= 1.0
        Z2, _ = minmax_normalize(Z, NormRanges(Z.min(axis=0), Z.max(axis=0)))
        np.testing.assert_allclose(Z2, Z, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(2, 15), st.integers(1, 4)),
                  elements=st.floats(-1e3, 1e3)), st.randoms())
    def test_row_order_invariant(self, X, rnd):
        perm = list(range(len(X)))
        rnd.shuffle(perm)
        Z, _ = minmax_normalize(X)
        Zp, _ = minmax_normalize(X[perm])
        np.testing.assert_array_equal(Zp, Z[perm])
