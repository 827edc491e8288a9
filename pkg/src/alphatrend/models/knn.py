"""k-nearest-neighbor voting classifier."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from .base import BaseClassifier

# rows of X scored per distance-matrix block, to bound memory
_CHUNK = 256


class KNeighborsClassifier(BaseClassifier):
    """Majority vote over the k nearest training rows.

    Distances are Euclidean. Exact distance ties are broken by training
    row order (earlier rows win), which keeps predictions reproducible
    on data with repeated points.
    """

    def __init__(self, n_neighbors: int = 5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        if self.n_neighbors < 1:
            raise ParameterError("n_neighbors must be >= 1")
        X, y = self._check_Xy(X, y, require_both_classes=False)
        if self.n_neighbors > X.shape[0]:
            raise ParameterError(
                f"n_neighbors={self.n_neighbors} exceeds the {X.shape[0]} training rows"
            )
        self._X = X
        self._y = y.astype(np.float64)
        self._sq = np.einsum("ij,ij->i", X, X)
        self._mark_fitted(X.shape[1])
        return self

    def _proba1(self, X) -> np.ndarray:
        X = self._check_predict_X(X)
        k = self.n_neighbors
        out = np.empty(X.shape[0])
        for start in range(0, X.shape[0], _CHUNK):
            block = X[start : start + _CHUNK]
            d2 = (
                np.einsum("ij,ij->i", block, block)[:, None]
                - 2.0 * (block @ self._X.T)
                + self._sq[None, :]
            )
            # stable sort keeps ties in training order
            nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
            out[start : start + len(block)] = self._y[nearest].mean(axis=1)
        return out

    def _get_state(self) -> dict:
        return {
            "X": self._X,
            "y": self._y.astype(np.int8),
            "n_features_in": self.n_features_in_,
        }

    def _set_state(self, state: dict) -> None:
        self._X = np.asarray(state["X"], dtype=np.float64)
        self._y = np.asarray(state["y"], dtype=np.float64)
        self._sq = np.einsum("ij,ij->i", self._X, self._X)
        self._mark_fitted(state["n_features_in"])


def select_k(train_X, train_y, val_X, val_y, candidates) -> tuple[int, float]:
    """Pick the neighbor count with the best validation accuracy.

    Ties go to the smallest k. Returns (k, accuracy).
    """
    if len(candidates) == 0:
        raise ParameterError("candidates must be non-empty")
    best_k = None
    best_acc = -1.0
    for k in sorted(set(int(c) for c in candidates)):
        model = KNeighborsClassifier(n_neighbors=k).fit(train_X, train_y)
        acc = float((model.predict(val_X) == val_y).mean())
        if acc > best_acc:
            best_acc = acc
            best_k = k
    return best_k, best_acc
