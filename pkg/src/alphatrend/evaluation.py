"""Metrics, ROC analysis, splits, cross-validation, and model comparison."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import (
    AlphaTrendError,
    DegenerateDataError,
    ParameterError,
    UndefinedMetricError,
)
from .io import _atomic_write_text
from .rng import SplitMix64

IMPORTANCE_THRESHOLD = 0.02


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts, with class 1 as the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(y_true, y_pred) -> ConfusionMatrix:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ParameterError("y_true and y_pred must have equal length")
    return ConfusionMatrix(
        tp=int(((y_true == 1) & (y_pred == 1)).sum()),
        fp=int(((y_true == 0) & (y_pred == 1)).sum()),
        tn=int(((y_true == 0) & (y_pred == 0)).sum()),
        fn=int(((y_true == 1) & (y_pred == 0)).sum()),
    )


def _safe_ratio(num: float, den: float, what: str) -> float:
    if den == 0:
        warnings.warn(f"{what} has a zero denominator; reporting 0.0", stacklevel=3)
        return 0.0
    return num / den


@dataclass(frozen=True)
class Metrics:
    """Accuracy plus per-class precision/recall/f1 and their averages.

    ``precision``/``recall``/``f1`` are the positive-class (class 1)
    values, matching how single-number scores are quoted elsewhere.
    """

    confusion: ConfusionMatrix
    accuracy: float
    per_class: dict = field(repr=False)
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float

    @property
    def precision(self) -> float:
        return self.per_class[1]["precision"]

    @property
    def recall(self) -> float:
        return self.per_class[1]["recall"]

    @property
    def f1(self) -> float:
        return self.per_class[1]["f1"]


def metrics_from_confusion(cm: ConfusionMatrix) -> Metrics:
    if cm.total == 0:
        raise DegenerateDataError("cannot score an empty prediction set")
    stats = {}
    for cls in (0, 1):
        if cls == 1:
            pred_pos, actual_pos, correct = cm.tp + cm.fp, cm.tp + cm.fn, cm.tp
        else:
            pred_pos, actual_pos, correct = cm.tn + cm.fn, cm.tn + cm.fp, cm.tn
        prec = _safe_ratio(correct, pred_pos, f"precision for class {cls}")
        rec = _safe_ratio(correct, actual_pos, f"recall for class {cls}")
        f1 = _safe_ratio(2 * prec * rec, prec + rec, f"f1 for class {cls}")
        stats[cls] = {"precision": prec, "recall": rec, "f1": f1, "support": actual_pos}
    n = cm.total
    w0 = stats[0]["support"] / n
    w1 = stats[1]["support"] / n
    return Metrics(
        confusion=cm,
        accuracy=(cm.tp + cm.tn) / n,
        per_class=stats,
        macro_precision=(stats[0]["precision"] + stats[1]["precision"]) / 2,
        macro_recall=(stats[0]["recall"] + stats[1]["recall"]) / 2,
        macro_f1=(stats[0]["f1"] + stats[1]["f1"]) / 2,
        weighted_precision=w0 * stats[0]["precision"] + w1 * stats[1]["precision"],
        weighted_recall=w0 * stats[0]["recall"] + w1 * stats[1]["recall"],
        weighted_f1=w0 * stats[0]["f1"] + w1 * stats[1]["f1"],
    )


def compute_metrics(y_true, y_pred) -> Metrics:
    return metrics_from_confusion(confusion(y_true, y_pred))


def roc_curve(y_true, scores) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(thresholds, fpr, tpr) swept over the unique scores.

    A row is positive at threshold t when its score is >= t. The first
    threshold is +inf, anchoring the curve at (0, 0); the last unique
    score yields (1, 1).
    """
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    if y_true.shape != scores.shape:
        raise ParameterError("y_true and scores must have equal length")
    if not np.isfinite(scores).all():
        raise ParameterError("scores must be finite")
    n_pos = int((y_true == 1).sum())
    n_neg = int((y_true == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            "ROC needs both classes present "
            f"(got {n_pos} positives, {n_neg} negatives)"
        )
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_y = y_true[order]
    distinct = np.r_[True, sorted_scores[1:] != sorted_scores[:-1]]
    cum_tp = np.cumsum(sorted_y == 1)
    cum_fp = np.cumsum(sorted_y == 0)
    # at each distinct score, counts include every tied row
    last_of_run = np.r_[distinct[1:], True]
    idx = np.flatnonzero(last_of_run)
    thresholds = np.r_[np.inf, sorted_scores[idx]]
    tpr = np.r_[0.0, cum_tp[idx] / n_pos]
    fpr = np.r_[0.0, cum_fp[idx] / n_neg]
    return thresholds, fpr, tpr


def roc_auc(y_true, scores) -> float:
    """Area under the ROC curve, by the trapezoid rule."""
    _, fpr, tpr = roc_curve(y_true, scores)
    return float(np.trapezoid(tpr, fpr))


def chronological_split(dataset: Dataset, test_fraction: float = 0.2) -> tuple[Dataset, Dataset]:
    """Last ceil(n * test_fraction) rows become the test set."""
    if not 0.0 < test_fraction < 1.0:
        raise ParameterError("test_fraction must be in (0, 1)")
    n = dataset.n_rows
    n_test = math.ceil(n * test_fraction)
    if n_test >= n:
        raise DegenerateDataError(
            f"test_fraction={test_fraction} leaves no training rows out of {n}"
        )
    idx = np.arange(n)
    return dataset.take(idx[: n - n_test]), dataset.take(idx[n - n_test :])


def shuffled_split(
    dataset: Dataset, test_fraction: float = 0.2, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Random split with the same test-size rule as the ordered one."""
    if not 0.0 < test_fraction < 1.0:
        raise ParameterError("test_fraction must be in (0, 1)")
    n = dataset.n_rows
    n_test = math.ceil(n * test_fraction)
    if n_test >= n:
        raise DegenerateDataError(
            f"test_fraction={test_fraction} leaves no training rows out of {n}"
        )
    perm = SplitMix64(seed).permutation(n)
    return dataset.take(np.sort(perm[n_test:])), dataset.take(np.sort(perm[:n_test]))


@dataclass(frozen=True)
class CVResult:
    scores: tuple
    mean: float


def kfold_cv(dataset: Dataset, trainer, scorer, folds: int = 5, seed: int = 0) -> CVResult:
    """Shuffled k-fold cross-validation.

    ``trainer(train)`` must return a fitted model and ``scorer(model,
    test)`` a float. Fold sizes differ by at most one row. A fold whose
    training half degenerates (one class absent) is skipped with a
    warning and excluded from the mean.
    """
    n = dataset.n_rows
    if folds < 2:
        raise ParameterError("folds must be >= 2")
    if folds > n:
        raise ParameterError(f"folds={folds} exceeds the {n} rows available")
    perm = SplitMix64(seed).permutation(n)
    bounds = [round(i * n / folds) for i in range(folds + 1)]
    scores = []
    for i in range(folds):
        test_idx = perm[bounds[i] : bounds[i + 1]]
        train_idx = np.concatenate([perm[: bounds[i]], perm[bounds[i + 1] :]])
        try:
            model = trainer(dataset.take(np.sort(train_idx)))
            scores.append(float(scorer(model, dataset.take(np.sort(test_idx)))))
        except DegenerateDataError as exc:
            warnings.warn(f"fold {i} skipped: {exc}", stacklevel=2)
    if not scores:
        raise DegenerateDataError("every cross-validation fold degenerated")
    return CVResult(scores=tuple(scores), mean=float(np.mean(scores)))


@dataclass(frozen=True)
class SearchResult:
    best_params: dict
    best_score: float
    trials: tuple


def f1_scorer(model, dataset: Dataset) -> float:
    return compute_metrics(dataset.y, model.predict(dataset.X)).f1


def random_search(
    model_cls,
    param_space: dict,
    train: Dataset,
    val: Dataset,
    n_iter: int = 20,
    seed: int = 0,
    scorer=f1_scorer,
) -> SearchResult:
    """Randomized hyperparameter search over a discrete space.

    Candidates are drawn from one seeded stream, with repeats of an
    already-drawn combination discarded (they do not count toward
    n_iter). On tied scores the earliest drawn candidate wins.
    """
    if n_iter < 1:
        raise ParameterError("n_iter must be >= 1")
    if not param_space:
        raise ParameterError("param_space must name at least one parameter")
    names = sorted(param_space)
    sizes = {k: len(param_space[k]) for k in names}
    if any(s == 0 for s in sizes.values()):
        raise ParameterError("every parameter needs at least one candidate value")
    total = 1
    for s in sizes.values():
        total *= s
    target = min(n_iter, total)
    rng = SplitMix64(seed)
    seen = set()
    candidates = []
    while len(candidates) < target:
        combo = tuple(rng.randint(sizes[k]) for k in names)
        if combo in seen:
            continue
        seen.add(combo)
        candidates.append({k: param_space[k][j] for k, j in zip(names, combo)})
    trials = []
    best = None
    for params in candidates:
        model = model_cls(**params).fit(train.X, train.y)
        score = float(scorer(model, val))
        trials.append((params, score))
        if best is None or score > best[1]:
            best = (params, score)
    return SearchResult(best_params=best[0], best_score=best[1], trials=tuple(trials))


def importance_report(importances, feature_names, threshold: float = IMPORTANCE_THRESHOLD):
    """Features whose importance strictly exceeds the threshold.

    Returns (name, importance) pairs sorted by importance descending;
    equal importances keep their original column order.
    """
    importances = np.asarray(importances, dtype=np.float64)
    if len(importances) != len(feature_names):
        raise ParameterError("one importance per feature name is required")
    keep = [
        (name, float(v))
        for name, v in zip(feature_names, importances)
        if v > threshold
    ]
    keep.sort(key=lambda pair: -pair[1])
    return keep


@dataclass(frozen=True)
class ComparisonRow:
    model: str
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float


def evaluate_model(model, test: Dataset) -> tuple[Metrics, float]:
    """Fit-free scoring of a fitted model on held-out rows."""
    scores = model.predict_proba(test.X)[:, 1]
    m = compute_metrics(test.y, model.predict(test.X))
    return m, roc_auc(test.y, scores)


def compare_models(models: dict, train: Dataset, test: Dataset) -> list[ComparisonRow]:
    """Fit each entry on train, score on test, one row per model.

    A model that raises is reported as a warning and skipped; the
    remaining rows are still produced.
    """
    rows = []
    for name, model in models.items():
        try:
            model.fit(train.X, train.y)
            m, auc = evaluate_model(model, test)
        except AlphaTrendError as exc:
            warnings.warn(f"{name} failed and was skipped: {exc}", stacklevel=2)
            continue
        rows.append(
            ComparisonRow(
                model=name,
                accuracy=m.accuracy,
                precision=m.precision,
                recall=m.recall,
                f1=m.f1,
                auc=auc,
            )
        )
    return rows


def write_comparison_csv(rows, path) -> None:
    lines = ["model,accuracy,precision,recall,f1,auc"]
    for r in rows:
        lines.append(
            f"{r.model},{r.accuracy:.6f},{r.precision:.6f},"
            f"{r.recall:.6f},{r.f1:.6f},{r.auc:.6f}"
        )
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_roc_csv(thresholds, fpr, tpr, path) -> None:
    lines = ["threshold,fpr,tpr"]
    for t, f, p in zip(thresholds, fpr, tpr):
        lines.append(f"{t:.6f},{f:.6f},{p:.6f}")
    _atomic_write_text(path, "\n".join(lines) + "\n")


_SVG_COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
)


def write_roc_overlay_svg(curves: dict, path) -> None:
    """Plot several ROC curves into one self-contained SVG.

    ``curves`` maps a label to an (fpr, tpr) pair. Axes run 0..1 with
    the chance diagonal dashed.
    """
    width, height, margin = 640, 480, 60
    px = width - 2 * margin
    py = height - 2 * margin

    def sx(v: float) -> float:
        return margin + v * px

    def sy(v: float) -> float:
        return height - margin - v * py

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(0)}" stroke="black"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(0)}" y2="{sy(1)}" stroke="black"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(1)}" '
        'stroke="#999" stroke-dasharray="6 4"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        parts.append(
            f'<text x="{sx(frac)}" y="{height - margin + 20}" font-size="12" '
            f'text-anchor="middle">{frac:g}</text>'
        )
        parts.append(
            f'<text x="{margin - 10}" y="{sy(frac) + 4}" font-size="12" '
            f'text-anchor="end">{frac:g}</text>'
        )
    parts.append(
        f'<text x="{sx(0.5)}" y="{height - 12}" font-size="14" '
        'text-anchor="middle">false positive rate</text>'
    )
    parts.append(
        f'<text x="16" y="{sy(0.5)}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 16 {sy(0.5)})">true positive rate</text>'
    )
    for i, (label, (fpr, tpr)) in enumerate(curves.items()):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        points = " ".join(f"{sx(f):.2f},{sy(t):.2f}" for f, t in zip(fpr, tpr))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = margin + 18 * i
        parts.append(
            f'<line x1="{width - margin - 150}" y1="{ly}" x2="{width - margin - 120}" '
            f'y2="{ly}" stroke="{color}" stroke-width="3"/>'
        )
        parts.append(
            f'<text x="{width - margin - 112}" y="{ly + 4}" font-size="12">{label}</text>'
        )
    parts.append("</svg>")
    _atomic_write_text(path, "\n".join(parts) + "\n")
