"""Joining features with labels on dates, plus Dataset accessors."""

import numpy as np
import pytest

from alphatrend.dataset import Dataset, join
from alphatrend.errors import EmptyPanelError
from alphatrend.features import FeatureMatrix, FeatureMeta
from alphatrend.labels import LabelVector


def fm_of(dates, values, names=None):
    values = np.asarray(values, dtype=float)
    names = names or [f"f{j}" for j in range(values.shape[1])]
    return FeatureMatrix(dates, names, values, {n: FeatureMeta(n) for n in names})


def lv_of(dates, values):
    return LabelVector(dates, np.asarray(values, dtype=np.int8), "short", {})


def test_join_intersects_dates():
    base = np.datetime64("2021-03-01")
    f = fm_of(base + np.arange(6), np.arange(12.0).reshape(6, 2))
    l = lv_of(base + np.arange(2, 9), np.array([1, 0, 1, 0, 1, 0, 1]))
    ds = join(f, l)
    assert ds.n_rows == 4
    np.testing.assert_array_equal(ds.dates, base + np.arange(2, 6))
    np.testing.assert_array_equal(ds.X[:, 0], [4.0, 6.0, 8.0, 10.0])
    np.testing.assert_array_equal(ds.y, [1, 0, 1, 0])
    assert ds.feature_names == ["f0", "f1"]


def test_join_keeps_feature_order():
    base = np.datetime64("2021-03-01")
    f = fm_of(base + np.arange(3), np.zeros((3, 3)), names=["c", "a", "b"])
    ds = join(f, lv_of(base + np.arange(3), [0, 1, 0]))
    assert ds.feature_names == ["c", "a", "b"]


def test_join_empty_overlap_raises():
    f = fm_of(np.datetime64("2020-01-01") + np.arange(3), np.zeros((3, 1)))
    l = lv_of(np.datetime64("2021-01-01") + np.arange(3), [0, 1, 0])
    with pytest.raises(EmptyPanelError):
        join(f, l)


def test_class_counts():
    ds = Dataset(np.zeros((5, 1)), np.array([1, 0, 1, 1, 0]), ["f0"], None)
    assert ds.class_counts() == {0: 2, 1: 3}
    assert ds.n_rows == 5
    assert ds.n_features == 1


def test_take_subsets_rows():
    base = np.datetime64("2022-01-01")
    ds = Dataset(
        np.arange(10.0).reshape(5, 2),
        np.array([0, 1, 0, 1, 1]),
        ["a", "b"],
        base + np.arange(5),
    )
    sub = ds.take(np.array([0, 3]))
    np.testing.assert_array_equal(sub.X, [[0.0, 1.0], [6.0, 7.0]])
    np.testing.assert_array_equal(sub.y, [0, 1])
    np.testing.assert_array_equal(sub.dates, base + np.array([0, 3]))
    assert sub.feature_names == ["a", "b"]


def test_take_without_dates():
    ds = Dataset(np.zeros((4, 1)), np.zeros(4, dtype=np.int8), ["f"], None)
    sub = ds.take(np.array([1, 2]))
    assert sub.dates is None
    assert sub.n_rows == 2
