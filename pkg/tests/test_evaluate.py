import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rumorspread.errors import ConstantSeries, TooFewRows
from rumorspread.regression import (Dataset, correlation_report, cross_validate, fit_cart,
                                    fit_linear, fold_indices, importance_report, pearson,
                                    rank_by_correlation)
from rumorspread.synthetic import regression_dataset


class TestFolds:
    @given(st.integers(5, 200), st.integers(2, 10), st.integers(0, 2**31))
    def test_partition(self, n, k, seed):
        assume(n >= k)
        folds = fold_indices(n, k, seed)
        flat = np.concatenate(folds)
        assert sorted(flat.tolist()) == list(range(n))
        sizes = [len(f) for f in folds]
        assert max(sizes) - min(sizes) <= 1

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            fold_indices(3, 5, 0)

    def test_seed_changes_assignment(self):
        assert fold_indices(50, 5, 1)[0].tolist() != fold_indices(50, 5, 2)[0].tolist()


class TestCrossValidate:
    def test_noiseless_linear(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(0, 10, (40, 3))
        data = Dataset(("a", "b", "c"), X, X @ [1.0, -2.0, 0.5] + 3.0)
        assert cross_validate(data, "linear").mean_mse < 1e-12

    def test_deterministic(self):
        data = regression_dataset("b", seed=4)
        one = cross_validate(data, "cart", seed=7).to_dict()
        two = cross_validate(data, "cart", seed=7).to_dict()
        assert one == two

    def test_weight_ranges_only_for_linear(self):
        data = regression_dataset("a", seed=1)
        assert set(cross_validate(data, "linear").weight_ranges) == set(data.feature_names)
        assert cross_validate(data, "cart").weight_ranges is None

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            cross_validate(regression_dataset("a"), "forest")

    @pytest.mark.parametrize("seed", range(5))
    def test_planted_directions(self, seed):
        b = regression_dataset("b", seed=seed)
        assert cross_validate(b, "cart", seed=seed).mean_mse < cross_validate(b, "linear", seed=seed).mean_mse
        a = regression_dataset("a", seed=seed)
        assert cross_validate(a, "linear", seed=seed).mean_mse <= cross_validate(a, "cart", seed=seed).mean_mse


class TestPearson:
    def test_identity_and_negation(self):
        x = [1.0, 4.0, 2.0, 8.0]
        assert pearson(x, x) == 1.0
        assert pearson(x, [-v for v in x]) == -1.0

    def test_three_points_closed_form(self):
        # dx = (-1, 0, 1), dy = (-7/3, -1/3, 8/3): r = 5 / sqrt(2 * 38/3).
        assert pearson([1, 2, 3], [2, 4, 7]) == pytest.approx(5 / math.sqrt(76 / 3), abs=1e-10)

    @settings(max_examples=200)
    @given(st.lists(st.floats(-100, 100), min_size=3, max_size=3),
           st.lists(st.floats(-100, 100), min_size=3, max_size=3))
    def test_three_points_formula(self, x, y):
        x, y = np.array(x), np.array(y)
        assume(np.ptp(x) > 1e-3 and np.ptp(y) > 1e-3)
        dx, dy = x - x.mean(), y - y.mean()
        expect = (dx @ dy) / math.sqrt((dx @ dx) * (dy @ dy))
        assert pearson(x, y) == pytest.approx(expect, abs=1e-10)

    def test_constant(self):
        with pytest.raises(ConstantSeries):
            pearson([1, 2, 3], [5, 5, 5])

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**31), st.floats(0.01, 100), st.floats(-100, 100),
           st.floats(0.01, 100), st.floats(-100, 100))
    def test_affine_invariance(self, seed, s1, t1, s2, t2):
        rng = np.random.default_rng(seed)
        x, y = rng.normal(0, 1, 20), rng.normal(0, 1, 20)
        assert pearson(s1 * x + t1, s2 * y + t2) == pytest.approx(pearson(x, y), abs=1e-9)


class TestReports:
    def test_cells_match_pearson(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(0, 1, (30, 3))
        labels = {"a": rng.normal(0, 1, 30), "b": X[:, 1] * 2, "c": np.ones(30)}
        rows = correlation_report(X, ["u", "v", "w"], labels, ["v", "u"])
        assert [r.feature for r in rows] == ["v", "u"]
        assert rows[0].r["b"] == pytest.approx(1.0)
        assert rows[1].r["a"] == pearson(X[:, 0], labels["a"])
        assert rows[0].r["c"] is None and rows[0].notes

    def test_ranking_invariant_to_column_scaling(self):
        rng = np.random.default_rng(1)
        X = rng.uniform(0, 1, (40, 4))
        y = X @ [3.0, -1.0, 0.5, 0.0] + rng.normal(0, 0.1, 40)
        names = list("abcd")
        ranked = rank_by_correlation(correlation_report(X, names, {"a": y}), "a")
        scaled = rank_by_correlation(correlation_report(X * [10, 0.1, 7, 3] + 5, names, {"a": y}), "a")
        assert ranked == scaled
        assert ranked[0] == "a"

    def test_importance_rows(self):
        data = regression_dataset("b", seed=0)
        rows = importance_report(fit_linear(data), fit_cart(data))
        assert [r.feature for r in rows] == list(data.feature_names)
        assert sum(r.importance for r in rows) == pytest.approx(1.0)
