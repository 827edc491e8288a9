"""CART-style binary classification trees.

Splits scan every admissible midpoint threshold exhaustively and take
the largest impurity decrease; exact ties resolve to the lowest feature
index, then the lowest threshold, so refits are bit-reproducible.  The
same grower serves the random forest, which passes a sampler that draws
a feature subset per node.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ..rng import SplitMix64
from .base import BaseClassifier


def _impurity(pos: np.ndarray, n: np.ndarray, criterion: str) -> np.ndarray:
    """Vectorized node impurity from positive counts and totals."""
    pos = np.asarray(pos, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = pos / n
        q = 1.0 - p
        if criterion == "gini":
            out = 1.0 - p * p - q * q
        else:  # entropy
            out = -np.where(p > 0, p * np.log2(p), 0.0) - np.where(
                q > 0, q * np.log2(q), 0.0
            )
    return np.where(n > 0, out, 0.0)


def _best_split(X, y, idx, features, min_leaf: int, criterion: str):
    """The (gain, feature, threshold) of the best admissible split.

    Returns None when no threshold separates the node while honoring
    min_leaf on both sides with a strictly positive gain.
    """
    n = len(idx)
    y_node = y[idx]
    pos_total = int(y_node.sum())
    parent = float(_impurity(pos_total, n, criterion))
    best_gain = 0.0
    best = None
    for f in features:
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs_s = xs[order]
        ys_s = y_node[order]
        pre = np.cumsum(ys_s)
        k = np.arange(1, n)
        valid = xs_s[1:] != xs_s[:-1]
        if min_leaf > 1:
            valid &= (k >= min_leaf) & ((n - k) >= min_leaf)
        if not valid.any():
            continue
        nl = k.astype(np.float64)
        nr = float(n) - nl
        posl = pre[:-1].astype(np.float64)
        posr = float(pos_total) - posl
        child = (nl * _impurity(posl, nl, criterion) + nr * _impurity(posr, nr, criterion)) / n
        gain = parent - child
        gain[~valid] = -np.inf
        j = int(np.argmax(gain))  # first max -> lowest threshold
        if gain[j] > best_gain:
            best_gain = float(gain[j])
            thr = (xs_s[j] + xs_s[j + 1]) / 2.0
            best = (best_gain, int(f), float(thr))
    return best


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int | None,
    min_samples_split: int,
    min_samples_leaf: int,
    criterion: str,
    rng: SplitMix64 | None = None,
    features_per_split: int | None = None,
) -> list[dict]:
    """Grow a tree, returned as a node list (index 0 is the root).

    Leaves have feature -1 and carry the class-1 fraction in ``prob``.
    When ``features_per_split`` is set, each node scans a random subset
    of features drawn from ``rng`` (without replacement).
    """
    n, p = X.shape
    nodes: list[dict] = []
    all_features = np.arange(p)
    # (node_id, row indices, depth), grown iteratively to dodge
    # recursion limits on deep trees
    stack: list[tuple[int, np.ndarray, int]] = []

    def new_node(idx) -> int:
        node_id = len(nodes)
        pos = int(y[idx].sum())
        nodes.append(
            {
                "feature": -1,
                "threshold": 0.0,
                "left": -1,
                "right": -1,
                "prob": pos / len(idx),
                "n": int(len(idx)),
                "gain": 0.0,
            }
        )
        return node_id

    root = new_node(np.arange(n))
    stack.append((root, np.arange(n), 0))
    while stack:
        node_id, idx, depth = stack.pop()
        node = nodes[node_id]
        if max_depth is not None and depth >= max_depth:
            continue
        if len(idx) < min_samples_split:
            continue
        pos = y[idx].sum()
        if pos == 0 or pos == len(idx):
            continue  # pure
        if features_per_split is not None and features_per_split < p:
            assert rng is not None
            perm = all_features.copy()
            rng.shuffle(perm)
            features = np.sort(perm[:features_per_split])
        else:
            features = all_features
        found = _best_split(X, y, idx, features, min_samples_leaf, criterion)
        if found is None:
            continue
        gain, f, thr = found
        goes_left = X[idx, f] <= thr
        left_idx = idx[goes_left]
        right_idx = idx[~goes_left]
        node["feature"] = f
        node["threshold"] = thr
        node["gain"] = gain
        node["left"] = new_node(left_idx)
        node["right"] = new_node(right_idx)
        stack.append((node["left"], left_idx, depth + 1))
        stack.append((node["right"], right_idx, depth + 1))
    return nodes


def tree_predict_proba(nodes: list[dict], X: np.ndarray) -> np.ndarray:
    """Class-1 probability per row via vectorized descent."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    frontier = [(0, np.arange(n))]
    while frontier:
        node_id, idx = frontier.pop()
        if len(idx) == 0:
            continue
        node = nodes[node_id]
        if node["feature"] < 0:
            out[idx] = node["prob"]
            continue
        goes_left = X[idx, node["feature"]] <= node["threshold"]
        frontier.append((node["left"], idx[goes_left]))
        frontier.append((node["right"], idx[~goes_left]))
    return out


def tree_importances(nodes: list[dict], n_features: int) -> np.ndarray:
    """Unnormalized impurity-decrease sums, weighted by node fraction."""
    out = np.zeros(n_features)
    total = nodes[0]["n"] if nodes else 1
    for node in nodes:
        if node["feature"] >= 0:
            out[node["feature"]] += (node["n"] / total) * node["gain"]
    return out


def tree_depth(nodes: list[dict]) -> int:
    depth = [0] * len(nodes)
    best = 0
    for i, node in enumerate(nodes):  # children always follow parents
        if node["feature"] >= 0:
            depth[node["left"]] = depth[i] + 1
            depth[node["right"]] = depth[i] + 1
            best = max(best, depth[i] + 1)
    return best


class DecisionTreeClassifier(BaseClassifier):
    """A single deterministic CART tree.

    Parameters
    ----------
    max_depth : int or None
        Depth cap; None grows until other limits bind.
    min_samples_split : int
        Nodes smaller than this become leaves.
    min_samples_leaf : int
        Both children of any split must keep at least this many rows.
    criterion : str
        'gini' or 'entropy'.
    """

    def __init__(
        self,
        max_depth: int | None = None,
        min_samples_split: int = 2,
        min_samples_leaf: int = 1,
        criterion: str = "gini",
    ):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.criterion = criterion

    def _validate_params(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ParameterError("max_depth must be >= 1 or None")
        if self.min_samples_split < 2:
            raise ParameterError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ParameterError("min_samples_leaf must be >= 1")
        if self.criterion not in ("gini", "entropy"):
            raise ParameterError(f"unknown criterion {self.criterion!r}")

    def fit(self, X, y):
        self._validate_params()
        X, y = self._check_Xy(X, y, require_both_classes=False)
        self.nodes_ = grow_tree(
            X,
            y,
            self.max_depth,
            self.min_samples_split,
            self.min_samples_leaf,
            self.criterion,
        )
        self._mark_fitted(X.shape[1])
        return self

    def _proba1(self, X) -> np.ndarray:
        X = self._check_predict_X(X)
        return tree_predict_proba(self.nodes_, X)

    @property
    def feature_importances_(self) -> np.ndarray:
        self._check_fitted()
        raw = tree_importances(self.nodes_, self.n_features_in_)
        total = raw.sum()
        return raw / total if total > 0 else raw

    @property
    def depth_(self) -> int:
        self._check_fitted()
        return tree_depth(self.nodes_)

    def _get_state(self) -> dict:
        return {"nodes": self.nodes_, "n_features_in": self.n_features_in_}

    def _set_state(self, state: dict) -> None:
        self.nodes_ = state["nodes"]
        self._mark_fitted(state["n_features_in"])
