"""Linear and tree regressors for the rumor coefficients, with evaluation."""
from .cart import Node, RegressionTree, TreeParams, best_split, fit_cart, prune
from .dataset import Dataset
from .evaluate import (CVResult, CorrelationRow, ImportanceRow, correlation_report,
                       cross_validate, fit_model, fold_indices, importance_report,
                       pearson, predict, rank_by_correlation)
from .linear import LinearModel, fit_linear

__all__ = [
    "CVResult", "CorrelationRow", "Dataset", "ImportanceRow", "LinearModel", "Node",
    "RegressionTree", "TreeParams", "best_split", "correlation_report",
    "cross_validate", "fit_cart", "fit_linear", "fit_model", "fold_indices",
    "importance_report", "pearson", "predict", "prune", "rank_by_correlation",
]
