"""Cross-validation, Pearson correlation and the feature/parameter reports."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ConstantSeries, DimensionMismatch, TooFewRows
from ..features import minmax_normalize
from .cart import RegressionTree, TreeParams, fit_cart
from .dataset import Dataset
from .linear import LinearModel, fit_linear

MODEL_KINDS = ("linear", "cart")


def predict(model: LinearModel | RegressionTree, row) -> float:
    """Prediction for a single feature row."""
    row = np.asarray(row, dtype=float)
    if row.ndim != 1:
        raise DimensionMismatch("predict takes a single 1-D row")
    if isinstance(model, RegressionTree):
        return model.predict_one(row)
    return float(model.predict(row)[0])


def fit_model(kind: str, data: Dataset, tree_params: TreeParams | None = None):
    if kind == "linear":
        return fit_linear(data)
    if kind == "cart":
        return fit_cart(data, tree_params or TreeParams())
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def fold_indices(n_rows: int, k: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle split into ``k`` folds whose sizes differ by at most one."""
    if n_rows < k:
        raise TooFewRows(f"{n_rows} rows cannot fill {k} folds")
    perm = np.random.default_rng(seed).permutation(n_rows)
    return [np.sort(f) for f in np.array_split(perm, k)]


@dataclass
class CVResult:
    kind: str
    k: int
    seed: int
    fold_mse: list[float]
    folds: list[list[int]]
    weight_ranges: dict[str, tuple[float, float]] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def mean_mse(self) -> float:
        return float(np.mean(self.fold_mse))

    @property
    def std_mse(self) -> float:
        return float(np.std(self.fold_mse))

    def to_dict(self) -> dict:
        d = {"model": self.kind, "k": self.k, "seed": self.seed,
             "fold_mse": [float(m) for m in self.fold_mse],
             "mean_mse": self.mean_mse, "std_mse": self.std_mse,
             "folds": self.folds}
        if self.weight_ranges is not None:
            d["weight_ranges"] = {n: list(r) for n, r in self.weight_ranges.items()}
        d.update(self.extra)
        return d


def cross_validate(data: Dataset, kind: str, k: int = 5, seed: int = 0,
                   tree_params: TreeParams | None = None) -> CVResult:
    """k-fold MSE with normalization ranges fitted on each training fold.

    Validation rows go through the training fold's affine map unclamped, so
    an exact linear relation stays exact outside the training range.
    """
    folds = fold_indices(data.n_rows, k, seed)
    mses: list[float] = []
    weights = []
    for i, val in enumerate(folds):
        train = np.concatenate([f for j, f in enumerate(folds) if j != i])
        X_train, ranges = minmax_normalize(data.X[train])
        X_val = ranges.apply(data.X[val], clamp=False)
        model = fit_model(kind, Dataset(data.feature_names, X_train, data.y[train]),
                          tree_params)
        resid = model.predict(X_val) - data.y[val]
        mses.append(float(np.mean(resid ** 2)))
        if kind == "linear":
            weights.append(model.weights)
    weight_ranges = None
    if weights:
        W = np.array(weights)
        weight_ranges = {n: (float(W[:, j].min()), float(W[:, j].max()))
                         for j, n in enumerate(data.feature_names)}
    return CVResult(kind, k, seed, mses, [f.tolist() for f in folds], weight_ranges)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatch("pearson needs two 1-D series of equal length")
    if len(x) < 2:
        raise ValueError("need at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(np.dot(dx, dx)), float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ConstantSeries("correlation undefined for a constant series")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


@dataclass
class CorrelationRow:
    feature: str
    r: dict[str, float | None]
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"feature": self.feature, **{f"r_{k}": v for k, v in self.r.items()},
                "notes": list(self.notes)}


def correlation_report(X: np.ndarray, feature_names: Sequence[str],
                       labels: dict[str, np.ndarray],
                       features: Sequence[str] | None = None) -> list[CorrelationRow]:
    """Pearson r for each (feature, parameter) pair.

    A cell whose feature or label is constant is left as ``None`` with a note.
    """
    names = list(feature_names)
    rows = []
    for f in (features if features is not None else names):
        col = X[:, names.index(f)]
        row = CorrelationRow(f, {})
        for p, target in labels.items():
            try:
                row.r[p] = pearson(col, target)
            except ConstantSeries:
                row.r[p] = None
                row.notes.append(f"{p}: constant series, correlation undefined")
        rows.append(row)
    return rows


def rank_by_correlation(rows: Sequence[CorrelationRow], param: str) -> list[str]:
    """Feature names ordered by |r| against ``param`` (undefined cells last)."""
    keyed = [(-abs(r.r[param]) if r.r[param] is not None else math.inf, i, r.feature)
             for i, r in enumerate(rows)]
    return [f for _, _, f in sorted(keyed)]


@dataclass
class ImportanceRow:
    feature: str
    weight: float
    importance: float


def importance_report(linear: LinearModel, tree: RegressionTree,
                      feature_names: Sequence[str] | None = None) -> list[ImportanceRow]:
    """Signed linear weights next to normalized tree importances."""
    names = list(feature_names or linear.feature_names or tree.feature_names)
    if len(linear.weights) != tree.n_features or len(names) != tree.n_features:
        raise DimensionMismatch("linear model and tree use different feature sets")
    imp = tree.feature_importances()
    return [ImportanceRow(n, float(w), float(v))
            for n, w, v in zip(names, linear.weights, imp)]
