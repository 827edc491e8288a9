"""L2-regularized logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from .base import BaseClassifier


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign to avoid overflow in exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _loss_and_grad(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float):
    """Mean cross-entropy plus (l2/2)||w||^2; the intercept is not penalized."""
    n = X.shape[0]
    z = X @ w + b
    p = _sigmoid(z)
    eps = 1e-12
    ce = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    loss = ce + 0.5 * l2 * float(w @ w)
    err = p - y
    grad_w = X.T @ err / n + l2 * w
    grad_b = float(err.mean())
    return loss, grad_w, grad_b


class LogisticRegression(BaseClassifier):
    """Binary logistic regression.

    Weights start at zero and descend the full-batch gradient with a
    fixed learning rate until the gradient norm drops below ``tol`` or
    ``max_iters`` passes run out.  Deterministic: no randomness at all.
    """

    def __init__(
        self,
        learning_rate: float = 0.1,
        l2_penalty: float = 0.0,
        max_iters: int = 1000,
        tol: float = 1e-6,
    ):
        self.learning_rate = learning_rate
        self.l2_penalty = l2_penalty
        self.max_iters = max_iters
        self.tol = tol

    def fit(self, X, y):
        if self.learning_rate <= 0:
            raise ParameterError("learning_rate must be positive")
        if self.l2_penalty < 0:
            raise ParameterError("l2_penalty must be non-negative")
        if self.max_iters < 0:
            raise ParameterError("max_iters must be non-negative")
        X, y = self._check_Xy(X, y)
        yf = y.astype(np.float64)
        w = np.zeros(X.shape[1])
        b = 0.0
        losses = []
        for _ in range(self.max_iters):
            loss, gw, gb = _loss_and_grad(w, b, X, yf, self.l2_penalty)
            losses.append(loss)
            gnorm = float(np.sqrt(gw @ gw + gb * gb))
            if gnorm < self.tol:
                break
            w -= self.learning_rate * gw
            b -= self.learning_rate * gb
        self.coef_ = w
        self.intercept_ = b
        self.loss_path_ = np.asarray(losses)
        self._mark_fitted(X.shape[1])
        return self

    def _proba1(self, X) -> np.ndarray:
        X = self._check_predict_X(X)
        return _sigmoid(X @ self.coef_ + self.intercept_)

    # persistence hooks

    def _get_state(self) -> dict:
        return {
            "coef": self.coef_.tolist(),
            "intercept": self.intercept_,
            "n_features_in": self.n_features_in_,
        }

    def _set_state(self, state: dict) -> None:
        self.coef_ = np.asarray(state["coef"], dtype=np.float64)
        self.intercept_ = float(state["intercept"])
        self._mark_fitted(state["n_features_in"])
