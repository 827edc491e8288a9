"""Metrics, ROC, splits, cross-validation, search, comparison outputs."""

import numpy as np
import pytest

import reference as ref
from alphatrend.dataset import Dataset
from alphatrend.errors import DegenerateDataError, ParameterError, UndefinedMetricError
from alphatrend.evaluation import (
    ComparisonRow,
    ConfusionMatrix,
    chronological_split,
    compare_models,
    compute_metrics,
    confusion,
    evaluate_model,
    f1_scorer,
    importance_report,
    kfold_cv,
    metrics_from_confusion,
    random_search,
    roc_auc,
    roc_curve,
    shuffled_split,
    write_comparison_csv,
    write_roc_csv,
    write_roc_overlay_svg,
)
from alphatrend.models import DecisionTreeClassifier, KNeighborsClassifier, LogisticRegression


def toy_dataset(n=120, p=3, seed=0, sep=2.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    y = (X[:, 0] * sep + rng.normal(size=n) > 0).astype(np.int8)
    dates = np.datetime64("2019-06-01") + np.arange(n)
    return Dataset(X, y, [f"f{j}" for j in range(p)], dates)


class TestConfusion:
    def test_counts(self):
        y = np.array([1, 1, 0, 0, 1, 0])
        p = np.array([1, 0, 0, 1, 1, 0])
        cm = confusion(y, p)
        assert (cm.tp, cm.fp, cm.tn, cm.fn) == (2, 1, 2, 1)
        assert cm.total == 6

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            confusion(np.array([1, 0]), np.array([1]))


class TestMetrics:
    def test_reported_trio_from_fixed_counts(self):
        m = metrics_from_confusion(ConfusionMatrix(tp=148, fp=106, tn=159, fn=91))
        assert m.accuracy == pytest.approx(0.609, abs=1e-3)
        assert m.precision == pytest.approx(0.583, abs=1e-3)
        assert m.recall == pytest.approx(0.619, abs=1e-3)

    def test_per_class_and_averages(self):
        cm = ConfusionMatrix(tp=30, fp=10, tn=40, fn=20)
        m = metrics_from_confusion(cm)
        # class 1: precision 30/40, recall 30/50
        assert m.per_class[1]["precision"] == pytest.approx(0.75)
        assert m.per_class[1]["recall"] == pytest.approx(0.6)
        # class 0: precision 40/60, recall 40/50
        assert m.per_class[0]["precision"] == pytest.approx(2 / 3)
        assert m.per_class[0]["recall"] == pytest.approx(0.8)
        assert m.per_class[1]["support"] == 50
        assert m.macro_precision == pytest.approx((0.75 + 2 / 3) / 2)
        w = (m.per_class[0]["f1"] * 50 + m.per_class[1]["f1"] * 50) / 100
        assert m.weighted_f1 == pytest.approx(w)

    def test_zero_denominator_warns_and_zeroes(self):
        # no positive predictions: precision of class 1 undefined
        with pytest.warns(UserWarning):
            m = compute_metrics(np.array([1, 0, 1]), np.array([0, 0, 0]))
        assert m.per_class[1]["precision"] == 0.0
        assert m.accuracy == pytest.approx(1 / 3)

    def test_perfect_prediction(self):
        y = np.array([1, 0, 1, 1, 0])
        m = compute_metrics(y, y)
        assert m.accuracy == 1.0
        assert m.f1 == 1.0
        assert m.macro_f1 == 1.0


class TestRoc:
    def test_anchors_and_monotonicity(self):
        rng = np.random.default_rng(1)
        y = (rng.uniform(size=50) < 0.4).astype(np.int8)
        s = rng.normal(size=50)
        thr, fpr, tpr = roc_curve(y, s)
        assert thr[0] == np.inf
        assert fpr[0] == 0.0 and tpr[0] == 0.0
        assert fpr[-1] == 1.0 and tpr[-1] == 1.0
        assert (np.diff(fpr) >= 0).all()
        assert (np.diff(tpr) >= 0).all()
        assert len(thr) == len(np.unique(s)) + 1

    def test_threshold_rule_is_geq(self):
        y = np.array([1, 0])
        s = np.array([0.9, 0.1])
        thr, fpr, tpr = roc_curve(y, s)
        # at threshold 0.9 only the positive fires
        np.testing.assert_allclose(thr, [np.inf, 0.9, 0.1])
        np.testing.assert_allclose(tpr, [0.0, 1.0, 1.0])
        np.testing.assert_allclose(fpr, [0.0, 0.0, 1.0])
        assert roc_auc(y, s) == 1.0

    def test_perfect_and_inverted(self):
        y = np.array([0, 0, 1, 1])
        assert roc_auc(y, np.array([0.1, 0.2, 0.8, 0.9])) == 1.0
        assert roc_auc(y, np.array([0.9, 0.8, 0.2, 0.1])) == 0.0
        assert roc_auc(y, np.array([0.5, 0.5, 0.5, 0.5])) == pytest.approx(0.5)

    def test_worked_example(self):
        # 2 positives, 2 negatives, one inversion: AUC 0.75
        y = np.array([1, 0, 1, 0])
        s = np.array([0.9, 0.6, 0.5, 0.2])
        assert roc_auc(y, s) == pytest.approx(0.75)

    @pytest.mark.parametrize("seed", range(10))
    def test_trapezoid_equals_pairwise_probability(self, seed):
        rng = np.random.default_rng(seed)
        n = 60
        y = (rng.uniform(size=n) < 0.5).astype(np.int8)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        s = np.round(rng.normal(size=n), 2)  # induce ties
        assert roc_auc(y, s) == pytest.approx(ref.pairwise_auc(y, s), abs=1e-12)

    def test_single_class_undefined(self):
        with pytest.raises(UndefinedMetricError):
            roc_curve(np.ones(5, dtype=np.int8), np.arange(5.0))
        with pytest.raises(UndefinedMetricError):
            roc_auc(np.zeros(4, dtype=np.int8), np.arange(4.0))

    def test_non_finite_scores_rejected(self):
        with pytest.raises(ParameterError):
            roc_curve(np.array([0, 1]), np.array([np.nan, 0.5]))


class TestSplits:
    def test_chronological_split_sizes_and_order(self):
        ds = toy_dataset(100)
        train, test = chronological_split(ds, test_fraction=0.2)
        assert train.n_rows == 80 and test.n_rows == 20
        assert train.dates[-1] < test.dates[0]

    def test_chronological_ceil(self):
        ds = toy_dataset(11)
        train, test = chronological_split(ds, test_fraction=0.2)
        assert test.n_rows == 3  # ceil(11 * 0.2)
        assert train.n_rows == 8

    def test_paper_scale_split(self):
        ds = toy_dataset(2516)
        train, test = chronological_split(ds, test_fraction=0.2)
        assert train.n_rows == 2012 and test.n_rows == 504

    def test_shuffled_split_deterministic_and_partition(self):
        ds = toy_dataset(50)
        a_train, a_test = shuffled_split(ds, 0.3, seed=4)
        b_train, b_test = shuffled_split(ds, 0.3, seed=4)
        np.testing.assert_array_equal(a_train.X, b_train.X)
        assert a_test.n_rows == 15
        merged = np.sort(np.concatenate([a_train.dates, a_test.dates]))
        np.testing.assert_array_equal(merged, ds.dates)
        c_train, _ = shuffled_split(ds, 0.3, seed=5)
        assert not np.array_equal(a_train.X, c_train.X)

    def test_shuffled_split_keeps_rows_sorted(self):
        ds = toy_dataset(40)
        train, test = shuffled_split(ds, 0.25, seed=0)
        assert (np.diff(train.dates.astype(int)) > 0).all()
        assert (np.diff(test.dates.astype(int)) > 0).all()

    def test_bad_fraction(self):
        ds = toy_dataset(20)
        for f in (0.0, 1.0, -0.1):
            with pytest.raises(ParameterError):
                chronological_split(ds, f)


class TestKfold:
    def test_fold_sizes_differ_by_at_most_one(self):
        ds = toy_dataset(103)
        seen = []

        def trainer(train):
            seen.append(train.n_rows)
            return LogisticRegression(max_iters=5).fit(train.X, train.y)

        res = kfold_cv(ds, trainer, f1_scorer, folds=5, seed=1)
        assert len(res.scores) == 5
        val_sizes = [103 - s for s in seen]
        assert max(val_sizes) - min(val_sizes) <= 1
        assert sum(val_sizes) == 103
        assert res.mean == pytest.approx(float(np.mean(res.scores)))

    def test_degenerate_fold_skipped_with_warning(self):
        X = np.random.default_rng(2).normal(size=(20, 2))
        y = np.array([0] * 19 + [1], dtype=np.int8)
        ds = Dataset(X, y, ["a", "b"], None)

        def trainer(train):
            return LogisticRegression(max_iters=5).fit(train.X, train.y)

        with pytest.warns(UserWarning):
            res = kfold_cv(ds, trainer, f1_scorer, folds=5, seed=0)
        assert len(res.scores) < 5

    def test_bad_folds(self):
        ds = toy_dataset(10)
        with pytest.raises(ParameterError):
            kfold_cv(ds, lambda t: None, f1_scorer, folds=1)


class TestRandomSearch:
    def test_distinct_combos_and_budget(self):
        train = toy_dataset(120, seed=3)
        val = toy_dataset(60, seed=4)
        space = {"max_depth": [2, 3, 4], "min_samples_leaf": [1, 2]}
        res = random_search(DecisionTreeClassifier, space, train, val, n_iter=6, seed=0)
        assert len(res.trials) == 6  # budget == total combos: all of them, once
        combos = {tuple(sorted(t[0].items())) for t in res.trials}
        assert len(combos) == 6

    def test_budget_capped_at_space_size(self):
        train = toy_dataset(100, seed=5)
        val = toy_dataset(50, seed=6)
        space = {"n_neighbors": [1, 3, 5]}
        res = random_search(KNeighborsClassifier, space, train, val, n_iter=50, seed=1)
        assert len(res.trials) == 3

    def test_deterministic(self):
        train = toy_dataset(100, seed=7)
        val = toy_dataset(50, seed=8)
        space = {"max_depth": [2, 3, 5, 8], "criterion": ["gini", "entropy"]}
        a = random_search(DecisionTreeClassifier, space, train, val, n_iter=5, seed=9)
        b = random_search(DecisionTreeClassifier, space, train, val, n_iter=5, seed=9)
        assert a.best_params == b.best_params
        assert [t[0] for t in a.trials] == [t[0] for t in b.trials]

    def test_best_is_max_earliest_on_tie(self):
        train = toy_dataset(100, seed=10)
        val = toy_dataset(60, seed=11)
        space = {"n_neighbors": [3, 5]}
        res = random_search(KNeighborsClassifier, space, train, val, n_iter=2, seed=2)
        scores = [t[1] for t in res.trials]
        assert res.best_score == max(scores)
        assert res.best_params == res.trials[int(np.argmax(scores))][0]

    def test_empty_space_rejected(self):
        train = toy_dataset(40)
        with pytest.raises(ParameterError):
            random_search(DecisionTreeClassifier, {}, train, train, n_iter=3)


class TestImportance:
    def test_strictly_above_threshold(self):
        imp = np.array([0.5, 0.02, 0.30, 0.18])
        names = ["a", "b", "c", "d"]
        kept = importance_report(imp, names, threshold=0.02)
        assert [k[0] for k in kept] == ["a", "c", "d"]  # 0.02 itself excluded

    def test_sorted_descending(self):
        imp = np.array([0.1, 0.4, 0.25, 0.25])
        kept = importance_report(imp, ["w", "x", "y", "z"], threshold=0.05)
        assert [k[0] for k in kept] == ["x", "y", "z", "w"]
        assert [k[1] for k in kept] == [0.4, 0.25, 0.25, 0.1]


class TestComparison:
    def test_compare_models_rows(self):
        ds = toy_dataset(200, seed=12)
        train, test = chronological_split(ds)
        rows = compare_models(
            {
                "logistic_regression": LogisticRegression(max_iters=100),
                "decision_tree": DecisionTreeClassifier(max_depth=3),
            },
            train,
            test,
        )
        assert [r.model for r in rows] == ["logistic_regression", "decision_tree"]
        for r in rows:
            assert 0.0 <= r.accuracy <= 1.0
            assert 0.0 <= r.auc <= 1.0

    def test_failing_model_skipped_with_warning(self):
        ds = toy_dataset(100, seed=13)
        train, test = chronological_split(ds)
        with pytest.warns(UserWarning):
            rows = compare_models(
                {
                    "knn": KNeighborsClassifier(n_neighbors=1000),  # k > n rows
                    "decision_tree": DecisionTreeClassifier(max_depth=2),
                },
                train,
                test,
            )
        assert [r.model for r in rows] == ["decision_tree"]

    def test_evaluate_model_consistency(self):
        ds = toy_dataset(150, seed=14)
        train, test = chronological_split(ds)
        clf = LogisticRegression(max_iters=200).fit(train.X, train.y)
        metrics, auc = evaluate_model(clf, test)
        assert metrics.accuracy == (clf.predict(test.X) == test.y).mean()
        assert auc == roc_auc(test.y, clf.predict_proba(test.X)[:, 1])


class TestArtifacts:
    def test_comparison_csv_format(self, tmp_path):
        rows = [
            ComparisonRow("logistic_regression", 0.609, 0.583, 0.66, 0.619, 0.651),
            ComparisonRow("knn", 0.5, 0.25, 1 / 3, 0.125, 0.505),
        ]
        path = tmp_path / "comparison.csv"
        write_comparison_csv(rows, path)
        text = path.read_text().splitlines()
        assert text[0] == "model,accuracy,precision,recall,f1,auc"
        assert text[1] == "logistic_regression,0.609000,0.583000,0.660000,0.619000,0.651000"
        assert text[2].startswith("knn,0.500000,0.250000,0.333333,")

    def test_roc_csv_format(self, tmp_path):
        y = np.array([1, 0, 1])
        s = np.array([0.8, 0.4, 0.6])
        thr, fpr, tpr = roc_curve(y, s)
        path = tmp_path / "roc.csv"
        write_roc_csv(thr, fpr, tpr, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "threshold,fpr,tpr"
        assert lines[1].split(",")[0] == "inf"
        assert len(lines) == 1 + len(thr)
        for line in lines[2:]:
            parts = line.split(",")
            assert len(parts) == 3
            float(parts[0])

    def test_roc_overlay_svg(self, tmp_path):
        rng = np.random.default_rng(15)
        y = (rng.uniform(size=40) < 0.5).astype(np.int8)
        curves = {}
        for name in ("alpha", "beta"):
            s = rng.normal(size=40)
            thr, fpr, tpr = roc_curve(y, s)
            curves[name] = (fpr, tpr)
        path = tmp_path / "overlay.svg"
        write_roc_overlay_svg(curves, path)
        text = path.read_text()
        assert text.lstrip().startswith("<svg")
        assert "alpha" in text and "beta" in text
        assert "polyline" in text
