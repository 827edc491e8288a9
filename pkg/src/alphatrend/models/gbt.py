"""Gradient-boosted trees on the logistic loss.

Each round fits a depth-capped regression tree to the first and second
derivatives of the loss at the current margin. Split quality is the
regularized second-order gain

    1/2 * (GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l))

with a fixed leaf penalty l, and a split is admitted only when that
gain strictly exceeds ``gamma``. Leaf output is -G/(H+l), scaled by the
learning rate. Positive rows can be up-weighted through
``scale_pos_weight``, which enters the derivatives and the tracked
training loss.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterError
from ..rng import substream
from .base import BaseClassifier
from .logistic import _sigmoid

_REG_LAMBDA = 1.0


def _weighted_logloss(y: np.ndarray, margin: np.ndarray, spw: float) -> float:
    """Mean logistic loss with positives weighted by spw."""
    w = np.where(y == 1, spw, 1.0)
    # log(1 + exp(-m)) for y=1 and log(1 + exp(m)) for y=0, stably
    z = np.where(y == 1, -margin, margin)
    loss = np.where(z > 30.0, z, np.log1p(np.exp(np.minimum(z, 30.0))))
    return float((w * loss).sum() / w.sum())


def _grow_gbt_tree(X, g, h, max_depth: int, gamma: float, features) -> list[dict]:
    nodes: list[dict] = []

    def new_node(idx) -> int:
        node_id = len(nodes)
        gs = float(g[idx].sum())
        hs = float(h[idx].sum())
        nodes.append(
            {
                "feature": -1,
                "threshold": 0.0,
                "left": -1,
                "right": -1,
                "value": -gs / (hs + _REG_LAMBDA),
                "gain": 0.0,
            }
        )
        return node_id

    root = new_node(np.arange(X.shape[0]))
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node_id, idx, depth = stack.pop()
        if depth >= max_depth or len(idx) < 2:
            continue
        gt = float(g[idx].sum())
        ht = float(h[idx].sum())
        parent_score = gt * gt / (ht + _REG_LAMBDA)
        best_gain = gamma
        best = None
        for f in features:
            xs = X[idx, f]
            order = np.argsort(xs, kind="stable")
            xs_s = xs[order]
            valid = xs_s[1:] != xs_s[:-1]
            if not valid.any():
                continue
            gl = np.cumsum(g[idx][order])[:-1]
            hl = np.cumsum(h[idx][order])[:-1]
            gain = 0.5 * (
                gl * gl / (hl + _REG_LAMBDA)
                + (gt - gl) ** 2 / (ht - hl + _REG_LAMBDA)
                - parent_score
            )
            gain[~valid] = -np.inf
            j = int(np.argmax(gain))
            if gain[j] > best_gain:
                best_gain = float(gain[j])
                best = (int(f), float((xs_s[j] + xs_s[j + 1]) / 2.0))
        if best is None:
            continue
        f, thr = best
        goes_left = X[idx, f] <= thr
        node = nodes[node_id]
        node["feature"] = f
        node["threshold"] = thr
        node["gain"] = best_gain
        node["left"] = new_node(idx[goes_left])
        node["right"] = new_node(idx[~goes_left])
        stack.append((node["left"], idx[goes_left], depth + 1))
        stack.append((node["right"], idx[~goes_left], depth + 1))
    return nodes


def _gbt_tree_values(nodes: list[dict], X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    frontier = [(0, np.arange(X.shape[0]))]
    while frontier:
        node_id, idx = frontier.pop()
        if len(idx) == 0:
            continue
        node = nodes[node_id]
        if node["feature"] < 0:
            out[idx] = node["value"]
            continue
        goes_left = X[idx, node["feature"]] <= node["threshold"]
        frontier.append((node["left"], idx[goes_left]))
        frontier.append((node["right"], idx[~goes_left]))
    return out


class GradientBoostedTrees(BaseClassifier):
    """Boosted second-order regression trees for binary targets.

    The ensemble starts from the prior log-odds of the (weighted)
    training labels. Round t draws its row and feature subsamples from
    substream (random_state, t), so runs are reproducible and rounds
    are independent of each other's draws.
    """

    def __init__(
        self,
        n_estimators: int = 100,
        learning_rate: float = 0.1,
        max_depth: int = 3,
        subsample: float = 1.0,
        colsample: float = 1.0,
        gamma: float = 0.0,
        scale_pos_weight: float = 1.0,
        random_state: int = 0,
    ):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.subsample = subsample
        self.colsample = colsample
        self.gamma = gamma
        self.scale_pos_weight = scale_pos_weight
        self.random_state = random_state

    def _validate_params(self):
        if self.n_estimators < 0:
            raise ParameterError("n_estimators must be >= 0")
        if self.learning_rate <= 0:
            raise ParameterError("learning_rate must be positive")
        if self.max_depth < 1:
            raise ParameterError("max_depth must be >= 1")
        if not 0.0 < self.subsample <= 1.0:
            raise ParameterError("subsample must be in (0, 1]")
        if not 0.0 < self.colsample <= 1.0:
            raise ParameterError("colsample must be in (0, 1]")
        if self.gamma < 0:
            raise ParameterError("gamma must be >= 0")
        if self.scale_pos_weight <= 0:
            raise ParameterError("scale_pos_weight must be positive")

    def fit(self, X, y):
        self._validate_params()
        X, y = self._check_Xy(X, y, require_both_classes=True)
        n, p = X.shape
        w = np.where(y == 1, self.scale_pos_weight, 1.0)
        yf = y.astype(np.float64)
        prior = float((w * yf).sum() / w.sum())
        self.base_score_ = math.log(prior / (1.0 - prior))
        margin = np.full(n, self.base_score_)
        self.trees_ = []
        self.loss_path_ = [_weighted_logloss(y, margin, self.scale_pos_weight)]
        n_rows = max(1, int(self.subsample * n))
        n_cols = max(1, int(self.colsample * p))
        for t in range(self.n_estimators):
            rng = substream(self.random_state, t)
            if n_rows < n:
                rows = rng.permutation(n)[:n_rows]
            else:
                rows = np.arange(n)
            if n_cols < p:
                features = np.sort(rng.permutation(p)[:n_cols])
            else:
                features = np.arange(p)
            prob = _sigmoid(margin)
            g = w * (prob - yf)
            h = w * prob * (1.0 - prob)
            nodes = _grow_gbt_tree(
                X[rows], g[rows], h[rows], self.max_depth, self.gamma, features
            )
            self.trees_.append(nodes)
            margin += self.learning_rate * _gbt_tree_values(nodes, X)
            self.loss_path_.append(_weighted_logloss(y, margin, self.scale_pos_weight))
        self._mark_fitted(p)
        return self

    def decision_function(self, X) -> np.ndarray:
        """Raw margin (log-odds) before the sigmoid."""
        X = self._check_predict_X(X)
        margin = np.full(X.shape[0], self.base_score_)
        for nodes in self.trees_:
            margin += self.learning_rate * _gbt_tree_values(nodes, X)
        return margin

    def _proba1(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))

    @property
    def feature_importances_(self) -> np.ndarray:
        self._check_fitted()
        raw = np.zeros(self.n_features_in_)
        for nodes in self.trees_:
            for node in nodes:
                if node["feature"] >= 0:
                    raw[node["feature"]] += node["gain"]
        total = raw.sum()
        return raw / total if total > 0 else raw

    def _get_state(self) -> dict:
        return {
            "base_score": self.base_score_,
            "trees": self.trees_,
            "n_features_in": self.n_features_in_,
        }

    def _set_state(self, state: dict) -> None:
        self.base_score_ = float(state["base_score"])
        self.trees_ = state["trees"]
        self.loss_path_ = []
        self._mark_fitted(state["n_features_in"])
