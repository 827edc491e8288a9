"""Single-hidden-layer perceptron trained with mini-batch SGD."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ..rng import SplitMix64
from .base import BaseClassifier
from .logistic import _sigmoid


def _bce_from_logits(z: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy computed stably from logits."""
    return float(np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))))


def _loss_and_grads(w1, b1, w2, b2, X, y):
    """Forward and backward pass over one batch.

    Returns the mean cross-entropy and the gradients with respect to
    each parameter array, in the same order as the inputs. Lives at
    module level so tests can difference it numerically.
    """
    z1 = X @ w1 + b1
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ w2 + b2
    prob = _sigmoid(z2)
    loss = _bce_from_logits(z2, y)
    m = X.shape[0]
    dz2 = (prob - y) / m
    gw2 = a1.T @ dz2
    gb2 = float(dz2.sum())
    da1 = np.outer(dz2, w2)
    dz1 = da1 * (z1 > 0.0)
    gw1 = X.T @ dz1
    gb1 = dz1.sum(axis=0)
    return loss, gw1, gb1, gw2, gb2


class MLPClassifier(BaseClassifier):
    """One ReLU hidden layer, sigmoid output, cross-entropy loss.

    Weights start uniform in +-1/sqrt(fan_in) and biases at zero; the
    init draws and every epoch's row shuffle come from a single counter
    stream keyed by random_state, so training is fully reproducible.
    """

    def __init__(
        self,
        hidden_units: int = 32,
        learning_rate: float = 0.1,
        epochs: int = 100,
        batch_size: int = 32,
        random_state: int = 0,
    ):
        self.hidden_units = hidden_units
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.random_state = random_state

    def _validate_params(self):
        if self.hidden_units < 1:
            raise ParameterError("hidden_units must be >= 1")
        if self.learning_rate <= 0:
            raise ParameterError("learning_rate must be positive")
        if self.epochs < 0:
            raise ParameterError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ParameterError("batch_size must be >= 1")

    def fit(self, X, y):
        self._validate_params()
        X, y = self._check_Xy(X, y, require_both_classes=False)
        n, p = X.shape
        h = self.hidden_units
        rng = SplitMix64(self.random_state)
        lim1 = 1.0 / np.sqrt(p)
        lim2 = 1.0 / np.sqrt(h)
        self.w1_ = (rng.uniform_array(p * h).reshape(p, h) * 2.0 - 1.0) * lim1
        self.b1_ = np.zeros(h)
        self.w2_ = (rng.uniform_array(h) * 2.0 - 1.0) * lim2
        self.b2_ = 0.0
        yf = y.astype(np.float64)
        self.loss_path_ = []
        lr = self.learning_rate
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                rows = order[start : start + self.batch_size]
                _, gw1, gb1, gw2, gb2 = _loss_and_grads(
                    self.w1_, self.b1_, self.w2_, self.b2_, X[rows], yf[rows]
                )
                self.w1_ -= lr * gw1
                self.b1_ -= lr * gb1
                self.w2_ -= lr * gw2
                self.b2_ -= lr * gb2
            z1 = np.maximum(X @ self.w1_ + self.b1_, 0.0)
            self.loss_path_.append(_bce_from_logits(z1 @ self.w2_ + self.b2_, yf))
        self._mark_fitted(p)
        return self

    def _proba1(self, X) -> np.ndarray:
        X = self._check_predict_X(X)
        a1 = np.maximum(X @ self.w1_ + self.b1_, 0.0)
        return _sigmoid(a1 @ self.w2_ + self.b2_)

    def _get_state(self) -> dict:
        return {
            "w1": self.w1_,
            "b1": self.b1_,
            "w2": self.w2_,
            "b2": self.b2_,
            "n_features_in": self.n_features_in_,
        }

    def _set_state(self, state: dict) -> None:
        self.w1_ = np.asarray(state["w1"], dtype=np.float64)
        self.b1_ = np.asarray(state["b1"], dtype=np.float64)
        self.w2_ = np.asarray(state["w2"], dtype=np.float64)
        self.b2_ = float(state["b2"])
        self._mark_fitted(state["n_features_in"])
