"""Bagged ensemble of CART trees with per-node feature subsampling."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterError
from ..rng import substream
from .base import BaseClassifier
from .tree import grow_tree, tree_importances, tree_predict_proba


class RandomForestClassifier(BaseClassifier):
    """Average of bootstrap-trained trees.

    Tree t draws its bootstrap sample and every per-node feature subset
    from an independent counter stream keyed by (random_state, t), so
    the forest is reproducible regardless of evaluation order and each
    tree can be rebuilt in isolation.

    max_features=None means floor(sqrt(p)) features examined per node.
    """

    def __init__(
        self,
        n_estimators: int = 100,
        max_depth: int | None = None,
        min_samples_split: int = 2,
        min_samples_leaf: int = 1,
        criterion: str = "gini",
        max_features: int | None = None,
        bootstrap: bool = True,
        random_state: int = 0,
    ):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.criterion = criterion
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state

    def _validate_params(self, p: int):
        if self.n_estimators < 1:
            raise ParameterError("n_estimators must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ParameterError("max_depth must be >= 1 or None")
        if self.min_samples_split < 2:
            raise ParameterError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ParameterError("min_samples_leaf must be >= 1")
        if self.criterion not in ("gini", "entropy"):
            raise ParameterError(f"unknown criterion {self.criterion!r}")
        if self.max_features is not None and not 1 <= self.max_features <= p:
            raise ParameterError(f"max_features must be in [1, {p}]")

    def fit(self, X, y):
        X, y = self._check_Xy(X, y, require_both_classes=False)
        n, p = X.shape
        self._validate_params(p)
        k = self.max_features if self.max_features is not None else max(1, int(math.isqrt(p)))
        self.trees_ = []
        for t in range(self.n_estimators):
            rng = substream(self.random_state, t)
            if self.bootstrap:
                rows = rng.randint_array(n, n)
            else:
                rows = np.arange(n)
            nodes = grow_tree(
                X[rows],
                y[rows],
                self.max_depth,
                self.min_samples_split,
                self.min_samples_leaf,
                self.criterion,
                rng=rng,
                features_per_split=k,
            )
            self.trees_.append(nodes)
        self._mark_fitted(p)
        return self

    def _proba1(self, X) -> np.ndarray:
        X = self._check_predict_X(X)
        acc = np.zeros(X.shape[0])
        for nodes in self.trees_:
            acc += tree_predict_proba(nodes, X)
        return acc / len(self.trees_)

    @property
    def feature_importances_(self) -> np.ndarray:
        self._check_fitted()
        raw = np.zeros(self.n_features_in_)
        for nodes in self.trees_:
            raw += tree_importances(nodes, self.n_features_in_)
        total = raw.sum()
        return raw / total if total > 0 else raw

    def _get_state(self) -> dict:
        return {"trees": self.trees_, "n_features_in": self.n_features_in_}

    def _set_state(self, state: dict) -> None:
        self.trees_ = state["trees"]
        self._mark_fitted(state["n_features_in"])
