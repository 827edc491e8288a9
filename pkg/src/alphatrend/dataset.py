"""Joining features with labels into model-ready arrays."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import EmptyPanelError, IntegrityError
from .features import FeatureMatrix
from .labels import LabelVector

log = logging.getLogger(__name__)


@dataclass
class Dataset:
    """Aligned X/y arrays; dates are kept when rows map to real days.

    Rows synthesized by resampling carry no date, so ``dates`` may be
    None after rebalancing.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    dates: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int8)
        if self.X.ndim != 2:
            raise IntegrityError("X must be 2-D")
        if len(self.y) != self.X.shape[0]:
            raise IntegrityError("X and y row counts differ")
        if self.X.shape[1] != len(self.feature_names):
            raise IntegrityError("feature_names does not match X columns")
        if self.dates is not None:
            self.dates = np.asarray(self.dates, dtype="datetime64[D]")
            if len(self.dates) != len(self.y):
                raise IntegrityError("dates and y lengths differ")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def class_counts(self) -> dict[int, int]:
        return {
            0: int((self.y == 0).sum()),
            1: int((self.y == 1).sum()),
        }

    def take(self, idx) -> "Dataset":
        dates = self.dates[idx] if self.dates is not None else None
        return Dataset(self.X[idx], self.y[idx], list(self.feature_names), dates)


def join(features: FeatureMatrix, labels: LabelVector) -> Dataset:
    """Inner-join on dates; rows must exist on both sides.

    Logs the class balance of the result, since heavy imbalance is the
    cue to rebalance before training.
    """
    common, fi, li = np.intersect1d(
        features.dates, labels.dates, assume_unique=True, return_indices=True
    )
    if len(common) == 0:
        raise EmptyPanelError("features and labels share no dates")
    ds = Dataset(
        features.values[fi],
        labels.values[li],
        list(features.names),
        common,
    )
    counts = ds.class_counts()
    log.info(
        "dataset: %d rows, %d features, class balance 0:%d / 1:%d",
        ds.n_rows,
        ds.n_features,
        counts[0],
        counts[1],
    )
    return ds
