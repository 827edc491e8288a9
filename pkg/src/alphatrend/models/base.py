"""Shared estimator plumbing: params, validation, prediction surface.

Estimators follow the familiar convention: hyperparameters are
__init__ keyword arguments retrievable via get_params/set_params, fit
returns self, predict_proba returns an (n, 2) array of per-class
probabilities with class 1 in the second column.
"""

from __future__ import annotations

import inspect

import numpy as np

from ..errors import DegenerateDataError, NotFittedError, ParameterError


class BaseClassifier:
    """Binary classifier base with parameter introspection."""

    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return [
            p.name
            for p in sig.parameters.values()
            if p.name != "self" and p.kind != p.VAR_KEYWORD
        ]

    def get_params(self) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params) -> "BaseClassifier":
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ParameterError(
                    f"{type(self).__name__} has no parameter {key!r}; "
                    f"valid: {sorted(valid)}"
                )
            setattr(self, key, value)
        return self

    # fitting state

    def _mark_fitted(self, n_features: int) -> None:
        self.n_features_in_ = int(n_features)

    def _check_fitted(self) -> None:
        if not hasattr(self, "n_features_in_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")

    # input validation

    @staticmethod
    def _check_X(X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ParameterError(f"X must be 2-D, got ndim={X.ndim}")
        if not np.isfinite(X).all():
            raise ParameterError("X contains non-finite values")
        return X

    def _check_Xy(self, X, y, require_both_classes: bool = True):
        X = self._check_X(X)
        y = np.asarray(y)
        if y.ndim != 1 or len(y) != X.shape[0]:
            raise ParameterError("y must be 1-D and match X rows")
        if X.shape[0] == 0:
            raise DegenerateDataError("cannot fit on an empty dataset")
        uniq = np.unique(y)
        if not np.isin(uniq, [0, 1]).all():
            raise ParameterError(f"labels must be 0/1, got {uniq}")
        if require_both_classes and len(uniq) < 2:
            raise DegenerateDataError("training data has a single class")
        return X, y.astype(np.int8)

    def _check_predict_X(self, X) -> np.ndarray:
        self._check_fitted()
        X = self._check_X(X)
        if X.shape[1] != self.n_features_in_:
            raise ParameterError(
                f"X has {X.shape[1]} features, model was fitted with "
                f"{self.n_features_in_}"
            )
        return X

    # the prediction surface subclasses inherit

    def _proba1(self, X) -> np.ndarray:  # pragma: no cover - abstract
        """Class-1 probability per row; subclasses implement this."""
        raise NotImplementedError

    def predict_proba(self, X) -> np.ndarray:
        """Per-class probabilities, one column per class (0 then 1)."""
        p = np.asarray(self._proba1(X), dtype=np.float64)
        return np.column_stack([1.0 - p, p])

    def predict(self, X, cutoff: float = 0.5) -> np.ndarray:
        """Class labels; a probability tied exactly at the cutoff is 0."""
        return (self.predict_proba(X)[:, 1] > cutoff).astype(np.int8)


class ColumnSubsetClassifier(BaseClassifier):
    """Train an inner estimator on a fixed subset of feature columns.

    Used for importance-filtered retraining: the subset is chosen once
    (by column index) and applied at both fit and predict time.
    """

    def __init__(self, inner: BaseClassifier, columns: list[int]):
        self.inner = inner
        self.columns = list(columns)

    def fit(self, X, y):
        X = self._check_X(X)
        if not self.columns:
            raise ParameterError("column subset is empty")
        if max(self.columns) >= X.shape[1]:
            raise ParameterError("column index out of range")
        self.inner.fit(X[:, self.columns], y)
        self._mark_fitted(X.shape[1])
        return self

    def _proba1(self, X) -> np.ndarray:
        X = self._check_predict_X(X)
        return self.inner.predict_proba(X[:, self.columns])[:, 1]
