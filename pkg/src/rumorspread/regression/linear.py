"""Ordinary least squares via the normal equations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, RankDeficient
from .dataset import Dataset

RIDGE_LAMBDA = 1e-8


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    intercept: float
    feature_names: tuple[str, ...] = ()
    ridge: float = 0.0
    meta: dict = field(default_factory=dict)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.weights):
            raise DimensionMismatch(
                f"row has {X.shape[1]} features, model expects {len(self.weights)}")
        return X @ self.weights + self.intercept

    def to_dict(self) -> dict:
        return {
            "kind": "linear",
            "feature_names": list(self.feature_names),
            "weights": [float(w) for w in self.weights],
            "intercept": float(self.intercept),
            "ridge": float(self.ridge),
        }

    @classmethod
    def from_dict(cls, d: dict) -> LinearModel:
        return cls(np.array(d["weights"], dtype=float), float(d["intercept"]),
                   tuple(d["feature_names"]), float(d.get("ridge", 0.0)))


def fit_linear(data: Dataset, *, ridge_fallback: bool = True) -> LinearModel:
    """Least-squares weights from ``(AᵀA) w = Aᵀy`` with an intercept column.

    A rank-deficient design raises :class:`RankDeficient`, or with
    ``ridge_fallback`` adds ``1e-8·I`` to the Gram matrix and records it.
    """
    n, p = data.X.shape
    A = np.hstack([data.X, np.ones((n, 1))])
    gram = A.T @ A
    rhs = A.T @ data.y
    ridge = 0.0
    if n < p + 1 or np.linalg.matrix_rank(A) < p + 1:
        if not ridge_fallback:
            raise RankDeficient(
                f"design with intercept has rank {np.linalg.matrix_rank(A)} < {p + 1}")
        ridge = RIDGE_LAMBDA
        gram = gram + ridge * np.eye(p + 1)
    w = np.linalg.solve(gram, rhs)
    # one step of iterative refinement tightens residual orthogonality
    w = w + np.linalg.solve(gram, rhs - gram @ w)
    return LinearModel(weights=w[:p], intercept=float(w[p]),
                       feature_names=data.feature_names, ridge=ridge)
