"""Feature matrices: catalog evaluation, filtering, standardization.

The pipeline is compute -> classify -> duplication_filter ->
correlation_prune -> standardize.  Each step returns a new matrix and
records, per column, why it was kept or dropped, so the sidecar export
documents the whole filtering history.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .dsl.ast import Expr
from .dsl.evaluator import evaluate_many
from .dsl.shapes import shape_check
from .errors import EmptyPanelError, FeatureComputationError, IntegrityError, SchemaError, ShapeError
from .panel import PricePanel

log = logging.getLogger(__name__)

MAX_CATEGORICAL_UNIQUE = 10
DUPLICATION_THRESHOLD = 0.20
CORRELATION_THRESHOLD = 0.99


@dataclass
class FeatureMeta:
    name: str
    kind: str | None = None  # 'categorical' | 'continuous'
    unique_count: int | None = None
    duplication_ratio: float | None = None
    kept: bool = True
    drop_reason: str | None = None  # duplication|correlation|all-undefined|zero-variance
    mean: float | None = None
    std: float | None = None


@dataclass
class FeatureMatrix:
    """A dense feature table on a date axis.

    ``names`` orders the kept columns of ``values``; ``meta`` also
    remembers columns dropped along the way.
    """

    dates: np.ndarray
    names: list[str]
    values: np.ndarray
    meta: dict[str, FeatureMeta] = field(default_factory=dict)
    fit_range: tuple[str, str] | None = None

    def __post_init__(self):
        self.dates = np.asarray(self.dates, dtype="datetime64[D]")
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.dates), len(self.names)):
            raise IntegrityError(
                f"values shape {self.values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.names)} names"
            )
        if len(set(self.names)) != len(self.names):
            raise IntegrityError("duplicate feature name")
        for name in self.names:
            self.meta.setdefault(name, FeatureMeta(name))

    @property
    def n_rows(self) -> int:
        return len(self.dates)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def drop(self, names: list[str], reason: str) -> "FeatureMatrix":
        """A new matrix without the named columns, recording the reason."""
        doomed = set(names)
        keep_idx = [i for i, n in enumerate(self.names) if n not in doomed]
        meta = {k: replace(v) for k, v in self.meta.items()}
        for n in names:
            meta[n].kept = False
            meta[n].drop_reason = reason
        return FeatureMatrix(
            self.dates.copy(),
            [self.names[i] for i in keep_idx],
            self.values[:, keep_idx].copy(),
            meta,
            self.fit_range,
        )


def _needs_panel(expr: Expr) -> bool:
    """True when the expression requires a multi-instrument context."""
    try:
        shape_check(expr, n_instruments=1)
        return False
    except ShapeError:
        # confirm it is valid in a panel context so real errors surface
        shape_check(expr, n_instruments=2)
        return True


def compute_features(
    panel: PricePanel,
    catalog: list[tuple[str, Expr]],
    constituents: PricePanel | None = None,
    reduce: str = "mean",
    jobs: int = 1,
    use_adjusted_close: bool = False,
) -> FeatureMatrix:
    """Evaluate a catalog into one column per alpha.

    Single-instrument expressions run on ``panel``; cross-sectional
    ones run on ``constituents`` and collapse to a series via
    ``reduce``.  Columns that come back all-undefined are dropped (and
    recorded); then rows where any surviving column is undefined are
    dropped, which removes the warm-up period.
    """
    if not catalog:
        raise FeatureComputationError("empty catalog")
    names = [n for n, _ in catalog]
    if len(set(names)) != len(names):
        raise FeatureComputationError("duplicate catalog names")

    series_tasks: list[tuple[int, Expr]] = []
    panel_tasks: list[tuple[int, Expr]] = []
    for i, (name, expr) in enumerate(catalog):
        try:
            if panel.n_instruments == 1 and _needs_panel(expr):
                if constituents is None:
                    raise FeatureComputationError(
                        f"{name}: cross-sectional expression needs a constituents panel"
                    )
                panel_tasks.append((i, expr))
            else:
                series_tasks.append((i, expr))
        except ShapeError as exc:
            raise FeatureComputationError(f"{name}: {exc}") from exc

    if panel_tasks and constituents is not None:
        if not np.array_equal(constituents.dates, panel.dates):
            raise IntegrityError(
                "constituents panel date axis differs from the primary panel"
            )

    cols: dict[int, np.ndarray] = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # warm-up windows warn on short fixtures
        if series_tasks:
            res = evaluate_many(
                [e for _, e in series_tasks],
                panel,
                jobs=jobs,
                reduce=reduce,
                use_adjusted_close=use_adjusted_close,
            )
            for (i, _), r in zip(series_tasks, res):
                cols[i] = r
        if panel_tasks:
            res = evaluate_many(
                [e for _, e in panel_tasks],
                constituents,
                jobs=jobs,
                reduce=reduce,
                use_adjusted_close=use_adjusted_close,
            )
            for (i, _), r in zip(panel_tasks, res):
                cols[i] = r

    meta: dict[str, FeatureMeta] = {}
    kept_names: list[str] = []
    kept_cols: list[np.ndarray] = []
    for i, (name, _) in enumerate(catalog):
        col = cols[i]
        if not np.isfinite(col).any():
            meta[name] = FeatureMeta(name, kept=False, drop_reason="all-undefined")
            log.info("feature %s is all-undefined; dropped", name)
            continue
        meta[name] = FeatureMeta(name)
        kept_names.append(name)
        kept_cols.append(col)

    if not kept_names:
        raise FeatureComputationError("every catalog column came back all-undefined")
    values = np.column_stack(kept_cols)
    defined = np.all(np.isfinite(values), axis=1)
    if not defined.any():
        raise FeatureComputationError("no date has all features defined")
    log.info(
        "feature matrix: %d columns, %d of %d rows after warm-up drop",
        len(kept_names),
        int(defined.sum()),
        len(defined),
    )
    return FeatureMatrix(panel.dates[defined], kept_names, values[defined], meta)


def classify(matrix: FeatureMatrix, max_unique: int = MAX_CATEGORICAL_UNIQUE) -> FeatureMatrix:
    """Mark each column categorical (unique count < max_unique) or continuous.

    Also records the duplication ratio: the fraction of rows occupied
    by repeats of already-seen values.
    """
    meta = {k: replace(v) for k, v in matrix.meta.items()}
    n = matrix.n_rows
    for j, name in enumerate(matrix.names):
        col = matrix.values[:, j]
        uniq = len(np.unique(col))
        meta[name].unique_count = uniq
        meta[name].kind = "categorical" if uniq < max_unique else "continuous"
        meta[name].duplication_ratio = (n - uniq) / n if n else 0.0
    return FeatureMatrix(matrix.dates, list(matrix.names), matrix.values, meta, matrix.fit_range)


def duplication_filter(
    matrix: FeatureMatrix, threshold: float = DUPLICATION_THRESHOLD
) -> FeatureMatrix:
    """Drop continuous columns whose duplication ratio exceeds threshold.

    Categorical columns repeat by nature and are exempt.  A ratio
    exactly at the threshold is kept.
    """
    if not (0.0 <= threshold <= 1.0):
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    work = matrix
    if any(matrix.meta[n].kind is None for n in matrix.names):
        work = classify(matrix)
    doomed = [
        n
        for n in work.names
        if work.meta[n].kind == "continuous"
        and work.meta[n].duplication_ratio > threshold
    ]
    if doomed:
        log.info("duplication filter dropped %s", doomed)
    return work.drop(doomed, "duplication")


def _pairwise_correlation(values: np.ndarray) -> np.ndarray:
    """abs Pearson matrix; constant-vs-constant pairs read 1, mixed 0."""
    k = values.shape[1]
    std = values.std(axis=0)
    const = std == 0.0
    corr = np.zeros((k, k))
    active = ~const
    if active.sum() >= 2:
        sub = np.corrcoef(values[:, active], rowvar=False)
        corr[np.ix_(active, active)] = np.abs(sub)
    if const.any():
        ci = np.nonzero(const)[0]
        corr[np.ix_(ci, ci)] = 1.0
    np.fill_diagonal(corr, 0.0)
    return corr


def correlation_prune(
    matrix: FeatureMatrix, threshold: float = CORRELATION_THRESHOLD
) -> FeatureMatrix:
    """Iteratively drop the later column of the most correlated pair.

    Repeats until no pair's |Pearson| reaches the threshold.  Ties on
    the maximum pick the earliest pair in column order.  Removing a
    column leaves other pairs' correlations unchanged, so the loop runs
    on one precomputed matrix.
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    if len(matrix.names) < 2:
        return matrix
    corr = _pairwise_correlation(matrix.values)
    alive = np.ones(len(matrix.names), dtype=bool)
    doomed: list[str] = []
    while True:
        sub = np.where(np.outer(alive, alive), corr, -1.0)
        flat = np.argmax(sub)
        i, j = divmod(flat, sub.shape[1])
        if sub[i, j] < threshold:
            break
        victim = max(i, j)  # the later column goes
        alive[victim] = False
        doomed.append(matrix.names[victim])
    if doomed:
        log.info("correlation prune dropped %s", doomed)
    return matrix.drop(doomed, "correlation")


def standardize(matrix: FeatureMatrix, fit_range: tuple | None = None) -> FeatureMatrix:
    """Z-score every column using statistics from the fit range only.

    ``fit_range`` is an inclusive (start, end) date pair; None fits on
    all rows.  Columns with zero standard deviation in the fit range
    are dropped with a warning.  Sample stddev (ddof=1).
    """
    if fit_range is None:
        sel = np.ones(matrix.n_rows, dtype=bool)
    else:
        start = np.datetime64(str(fit_range[0]), "D")
        end = np.datetime64(str(fit_range[1]), "D")
        sel = (matrix.dates >= start) & (matrix.dates <= end)
    if sel.sum() < 2:
        raise EmptyPanelError("standardize fit range selects fewer than 2 rows")
    fit = matrix.values[sel]
    mean = fit.mean(axis=0)
    std = fit.std(axis=0, ddof=1)
    dead = std == 0.0
    doomed = [n for n, d in zip(matrix.names, dead) if d]
    if doomed:
        warnings.warn(f"dropping zero-variance columns {doomed}", stacklevel=2)
    work = matrix.drop(doomed, "zero-variance") if doomed else matrix
    live = ~dead
    values = (work.values - mean[live]) / std[live]
    meta = {k: replace(v) for k, v in work.meta.items()}
    for name, m, s in zip(work.names, mean[live], std[live]):
        meta[name].mean = float(m)
        meta[name].std = float(s)
    first = str(matrix.dates[sel][0])
    last = str(matrix.dates[sel][-1])
    return FeatureMatrix(work.dates, list(work.names), values, meta, (first, last))


def export_features(matrix: FeatureMatrix, csv_path, meta_path=None) -> None:
    """Write the matrix as CSV plus a sidecar describing each column.

    Floats are written with repr so a reimport is bit-exact.
    """
    lines = ["date," + ",".join(matrix.names)]
    for i in range(matrix.n_rows):
        cells = [str(matrix.dates[i])]
        cells += [repr(float(v)) for v in matrix.values[i]]
        lines.append(",".join(cells))
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    if meta_path is None:
        return
    out = ["schema_version = 1"]
    if matrix.fit_range is not None:
        out.append(f"fit_start = {matrix.fit_range[0]}")
        out.append(f"fit_end = {matrix.fit_range[1]}")
    for name in sorted(matrix.meta):
        m = matrix.meta[name]
        out.append(f"[{name}]")
        out.append(f"kept = {'true' if m.kept else 'false'}")
        if m.kind is not None:
            out.append(f"kind = {m.kind}")
        if m.unique_count is not None:
            out.append(f"unique_count = {m.unique_count}")
        if m.duplication_ratio is not None:
            out.append(f"duplication_ratio = {m.duplication_ratio!r}")
        if m.drop_reason is not None:
            out.append(f"drop_reason = {m.drop_reason}")
        if m.mean is not None:
            out.append(f"mean = {m.mean!r}")
        if m.std is not None:
            out.append(f"std = {m.std!r}")
    with open(meta_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def import_features(csv_path, meta_path=None) -> FeatureMatrix:
    """Read back an exported feature matrix (and sidecar, if given)."""
    with open(csv_path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("date,"):
            raise SchemaError(f"{csv_path}: expected a 'date,...' header")
        names = header.split(",")[1:]
        dates = []
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            dates.append(np.datetime64(cells[0], "D"))
            rows.append([float(c) for c in cells[1:]])
    values = np.asarray(rows, dtype=np.float64)
    meta: dict[str, FeatureMeta] = {}
    fit_range = None
    if meta_path is not None:
        fit = {}
        current: FeatureMeta | None = None
        with open(meta_path, "r", encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("[") and line.endswith("]"):
                    current = FeatureMeta(line[1:-1])
                    meta[current.name] = current
                    continue
                key, _, val = line.partition("=")
                key = key.strip()
                val = val.strip()
                if current is None:
                    fit[key] = val
                    continue
                if key == "kept":
                    current.kept = val == "true"
                elif key == "kind":
                    current.kind = val
                elif key == "unique_count":
                    current.unique_count = int(val)
                elif key == "duplication_ratio":
                    current.duplication_ratio = float(val)
                elif key == "drop_reason":
                    current.drop_reason = val
                elif key == "mean":
                    current.mean = float(val)
                elif key == "std":
                    current.std = float(val)
        if "fit_start" in fit and "fit_end" in fit:
            fit_range = (fit["fit_start"], fit["fit_end"])
    return FeatureMatrix(np.asarray(dates), names, values, meta, fit_range)
