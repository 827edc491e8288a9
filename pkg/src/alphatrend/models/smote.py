"""Synthetic minority oversampling (interpolation between neighbors)."""

from __future__ import annotations

import numpy as np

from ..dataset import Dataset
from ..errors import DegenerateDataError, ParameterError
from ..rng import SplitMix64


class SMOTE:
    """Even out class counts by synthesizing minority rows.

    Each synthetic row interpolates a random minority row toward one of
    its k nearest minority neighbors: x + lam * (neighbor - x) with lam
    uniform on [0, 1). Enough rows are added to bring the minority
    count to round(target_ratio * majority count). Originals keep their
    order; synthetics are appended after them.
    """

    def __init__(self, k_neighbors: int = 5, target_ratio: float = 1.0, random_state: int = 0):
        self.k_neighbors = k_neighbors
        self.target_ratio = target_ratio
        self.random_state = random_state

    def fit_resample(self, X, y) -> tuple[np.ndarray, np.ndarray]:
        if self.k_neighbors < 1:
            raise ParameterError("k_neighbors must be >= 1")
        if self.target_ratio <= 0:
            raise ParameterError("target_ratio must be positive")
        X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
        y = np.asarray(y).astype(np.int8)
        if X.ndim != 2 or X.shape[0] != len(y):
            raise ParameterError("X must be 2-D with one label per row")
        n_pos = int((y == 1).sum())
        n_neg = int((y == 0).sum())
        if n_pos == 0 or n_neg == 0:
            raise DegenerateDataError("both classes must be present to resample")
        minority = 1 if n_pos < n_neg else 0
        n_min = min(n_pos, n_neg)
        n_maj = max(n_pos, n_neg)
        n_synth = int(round(self.target_ratio * n_maj)) - n_min
        if n_synth <= 0:
            return X.copy(), y.copy()
        if n_min < self.k_neighbors + 1:
            raise ParameterError(
                f"minority class has {n_min} rows; need at least "
                f"{self.k_neighbors + 1} for k_neighbors={self.k_neighbors}"
            )
        Xm = X[y == minority]
        # pairwise squared distances among minority rows, self excluded
        sq = np.einsum("ij,ij->i", Xm, Xm)
        d2 = sq[:, None] - 2.0 * (Xm @ Xm.T) + sq[None, :]
        order = np.argsort(d2, axis=1, kind="stable")
        neighbors = np.empty((n_min, self.k_neighbors), dtype=np.int64)
        for i in range(n_min):
            row = order[i]
            neighbors[i] = row[row != i][: self.k_neighbors]
        rng = SplitMix64(self.random_state)
        synth = np.empty((n_synth, X.shape[1]))
        for s in range(n_synth):
            base = rng.randint(n_min)
            nn = neighbors[base, rng.randint(self.k_neighbors)]
            lam = rng.uniform()
            synth[s] = Xm[base] + lam * (Xm[nn] - Xm[base])
        X_out = np.vstack([X, synth])
        y_out = np.concatenate([y, np.full(n_synth, minority, dtype=np.int8)])
        return X_out, y_out


def rebalance(
    dataset: Dataset,
    k_neighbors: int = 5,
    target_ratio: float = 1.0,
    random_state: int = 0,
) -> Dataset:
    """Resample a dataset; the result has no row dates (rows are mixed
    real and synthetic, so a date axis would be meaningless)."""
    sampler = SMOTE(k_neighbors=k_neighbors, target_ratio=target_ratio, random_state=random_state)
    X_res, y_res = sampler.fit_resample(dataset.X, dataset.y)
    return Dataset(X=X_res, y=y_res, feature_names=dataset.feature_names, dates=None)
