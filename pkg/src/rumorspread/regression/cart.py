"""CART regression tree: greedy squared-error splits plus weakest-link pruning."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch
from .dataset import Dataset

# Relative slack under which two split costs count as tied.
TIE_RTOL = 1e-12


@dataclass
class Node:
    value: float
    n_samples: int
    sse: float
    feature: int | None = None
    threshold: float | None = None
    left: Node | None = None
    right: Node | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def leaves(self) -> int:
        return 1 if self.is_leaf else self.left.leaves() + self.right.leaves()

    def depth(self) -> int:
        return 0 if self.is_leaf else 1 + max(self.left.depth(), self.right.depth())

    def subtree_sse(self) -> float:
        return self.sse if self.is_leaf else self.left.subtree_sse() + self.right.subtree_sse()

    def make_leaf(self) -> None:
        self.feature = self.threshold = self.left = self.right = None

    def to_dict(self) -> dict:
        d = {"value": self.value, "n_samples": self.n_samples, "sse": self.sse}
        if not self.is_leaf:
            d.update(feature=self.feature, threshold=self.threshold,
                     left=self.left.to_dict(), right=self.right.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Node:
        node = cls(float(d["value"]), int(d["n_samples"]), float(d["sse"]))
        if "feature" in d:
            node.feature = int(d["feature"])
            node.threshold = float(d["threshold"])
            node.left = cls.from_dict(d["left"])
            node.right = cls.from_dict(d["right"])
        return node


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 4
    min_samples_leaf: int = 5
    ccp_alpha: float = 0.0

    def to_dict(self) -> dict:
        return {"max_depth": self.max_depth, "min_samples_leaf": self.min_samples_leaf,
                "ccp_alpha": self.ccp_alpha}


@dataclass
class RegressionTree:
    root: Node
    n_features: int
    params: TreeParams = field(default_factory=TreeParams)
    feature_names: tuple[str, ...] = ()

    def predict_one(self, row) -> float:
        row = np.asarray(row, dtype=float).reshape(-1)
        if row.shape[0] != self.n_features:
            raise DimensionMismatch(
                f"row has {row.shape[0]} features, tree expects {self.n_features}")
        node = self.root
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node.value

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.predict_one(r) for r in X])

    @property
    def depth(self) -> int:
        return self.root.depth()

    @property
    def n_leaves(self) -> int:
        return self.root.leaves()

    def internal_nodes(self) -> list[Node]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if not node.is_leaf:
                out.append(node)
                stack.extend((node.right, node.left))
        return out

    def feature_importances(self) -> np.ndarray:
        """Total squared-error reduction per feature, normalized to sum to 1.

        A single-leaf tree has no splits and returns all zeros.
        """
        imp = np.zeros(self.n_features)
        for node in self.internal_nodes():
            imp[node.feature] += node.sse - node.left.sse - node.right.sse
        total = imp.sum()
        return imp / total if total > 0 else imp

    def to_dict(self) -> dict:
        return {"kind": "cart", "feature_names": list(self.feature_names),
                "n_features": self.n_features, "params": self.params.to_dict(),
                "root": self.root.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> RegressionTree:
        return cls(Node.from_dict(d["root"]), int(d["n_features"]),
                   TreeParams(**d["params"]), tuple(d["feature_names"]))


def _sse(y: np.ndarray) -> float:
    return float(np.sum((y - y.mean()) ** 2)) if len(y) else 0.0


def best_split(X: np.ndarray, y: np.ndarray, min_samples_leaf: int = 1
               ) -> tuple[int, float, float] | None:
    """Best ``(feature, threshold, child_sse)`` over midpoint thresholds.

    Ties within ``TIE_RTOL`` keep the lowest feature index, then the lowest
    threshold.  Returns ``None`` when no split satisfies ``min_samples_leaf``.
    """
    n, p = X.shape
    yc = y - y.mean()
    total_sq = float(np.dot(yc, yc))
    tol = TIE_RTOL * max(total_sq, 1e-300)
    best = None
    for j in range(p):
        order = np.argsort(X[:, j], kind="stable")
        xs, ys = X[order, j], yc[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        # candidate cut after position k-1 (k points go left)
        k = np.arange(1, n)
        valid = (xs[1:] > xs[:-1]) & (k >= min_samples_leaf) & (n - k >= min_samples_leaf)
        if not np.any(valid):
            continue
        k = k[valid]
        sl, ql = csum[k - 1], csq[k - 1]
        sr, qr = csum[-1] - sl, csq[-1] - ql
        cost = (ql - sl * sl / k) + (qr - sr * sr / (n - k))
        thresholds = 0.5 * (xs[k - 1] + xs[k])
        i = int(np.argmin(cost))
        # lowest threshold among near-ties within this feature
        near = np.flatnonzero(cost <= cost[i] + tol)
        i = int(near[np.argmin(thresholds[near])])
        if best is None or cost[i] < best[2] - tol:
            best = (j, float(thresholds[i]), float(max(cost[i], 0.0)))
    return best


def _grow(X: np.ndarray, y: np.ndarray, depth: int, params: TreeParams) -> Node:
    # A constant node predicts its value exactly rather than a rounded mean.
    value = float(y[0]) if np.ptp(y) == 0 else float(y.mean())
    node = Node(value=value, n_samples=len(y), sse=_sse(y))
    if (depth >= params.max_depth or len(y) < 2 * params.min_samples_leaf
            or node.sse <= 1e-14 * max(1.0, float(np.dot(y, y)))):
        return node
    split = best_split(X, y, params.min_samples_leaf)
    if split is None or split[2] >= node.sse:
        return node
    j, thr, _ = split
    mask = X[:, j] <= thr
    node.feature, node.threshold = j, thr
    node.left = _grow(X[mask], y[mask], depth + 1, params)
    node.right = _grow(X[~mask], y[~mask], depth + 1, params)
    return node


def prune(tree: RegressionTree, alpha: float) -> RegressionTree:
    """Weakest-link cost-complexity pruning, in place.

    Cost is ``SSE / n_root + alpha * leaves``.  The internal node with the
    smallest per-leaf error increase is collapsed while that increase is
    ``≤ alpha``.  ``alpha = 0`` leaves the tree untouched.
    """
    if alpha <= 0:
        return tree
    n_root = tree.root.n_samples
    while not tree.root.is_leaf:
        weakest, g_min = None, np.inf
        for node in tree.internal_nodes():
            g = (node.sse - node.subtree_sse()) / n_root / (node.leaves() - 1)
            if g < g_min:
                weakest, g_min = node, g
        if g_min > alpha:
            break
        weakest.make_leaf()
    return tree


def fit_cart(data: Dataset, params: TreeParams | None = None, **kw) -> RegressionTree:
    """Grow a regression tree on ``data`` and prune it at ``params.ccp_alpha``."""
    params = params or TreeParams(**kw)
    if data.n_rows == 0:
        raise ValueError("cannot fit a tree on an empty dataset")
    root = _grow(data.X, data.y, 0, params)
    tree = RegressionTree(root, data.n_features, params, data.feature_names)
    return prune(tree, params.ccp_alpha)
