"""Command-line front end: ingest, features, label, search, train,
evaluate, compare.

Every command is a pure function of its input artifacts plus the
config, so re-running a command reproduces its outputs byte for byte.
A JSON-lines run log records the config hash, seed, and output hashes
of each invocation (the log itself carries timestamps and is the one
file excluded from reproducibility claims).

Exit codes: 0 success, 2 anticipated user/config/data error (message
plus remediation hint), 1 anything unexpected.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import traceback
import warnings
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import evaluation as ev
from . import features as feats
from . import io as aio
from . import labels as lab
from .config import RunConfig, config_hash, default_config, load_config
from .dataset import Dataset, join
from .dsl import load_catalog, load_default_catalog
from .errors import AlphaTrendError, ConfigError
from .features import FeatureMatrix
from .models import MODEL_FAMILIES, load_model, rebalance, save_model
from .models.base import ColumnSubsetClassifier
from .panel import PricePanel, forward_fill, trim

# comparison rows, in report order
COMPARE_ORDER = (
    "logistic_regression",
    "decision_tree",
    "random_forest",
    "random_forest_subset",
    "neural_network",
    "knn",
    "gradient_boosting",
)


class _UserError(Exception):
    """Anticipated failure: message plus a remediation hint."""

    def __init__(self, message: str, hint: str):
        super().__init__(message)
        self.hint = hint


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _log_run(out: Path, command: str, cfg: RunConfig, outputs: list[Path]) -> None:
    entry = {
        "ts": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "outputs": {str(p.relative_to(out)): _sha256(p) for p in sorted(outputs)},
    }
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "runlog.jsonl", "a", encoding="utf-8") as handle:
        handle.write(json.dumps(entry, sort_keys=True) + "\n")


def _load_cfg(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg.features.jobs = args.jobs
    return cfg


def _panel_dir(out: Path) -> Path:
    return out / "panels"


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise _UserError(
            f"missing artifact: {path}",
            f"run `alphatrend {producer}` first (same --out directory)",
        )
    return path


# ---------------------------------------------------------------- ingest


def cmd_ingest(args, cfg: RunConfig, out: Path) -> list[Path]:
    index_path = Path(args.index)
    if not index_path.exists():
        raise _UserError(
            f"index CSV not found: {index_path}",
            "pass --index pointing at an OHLCV CSV file",
        )
    index = aio.load_csv(index_path, ticker="INDEX")
    members = []
    for m in args.members or []:
        p = Path(m)
        if not p.exists():
            raise _UserError(f"member CSV not found: {p}", "check the --members paths")
        members.append(aio.load_csv(p, ticker=p.stem))

    index = forward_fill(index)
    index = trim(index, warmup_months=cfg.data.warmup_months, drop_last=True)
    written = []
    pdir = _panel_dir(out)
    aio.write_csv(index.single("INDEX"), pdir / "index.csv")
    written.append(pdir / "index.csv")
    if members:
        from .panel import align_panels

        aligned = align_panels(members)
        aligned = forward_fill(aligned)
        keep = np.isin(aligned.dates, index.dates)
        if not keep.any():
            raise _UserError(
                "member dates do not overlap the trimmed index dates",
                "check that member files cover the index period",
            )
        aligned = aligned.select_rows(np.flatnonzero(keep))
        if not np.array_equal(aligned.dates, index.dates):
            raise _UserError(
                "members are missing dates present in the index",
                "member files must cover every index date (after forward fill)",
            )
        for tkr in aligned.tickers:
            path = pdir / f"{tkr}.csv"
            aio.write_csv(aligned.single(tkr), path)
            written.append(path)
    manifest = {
        "tickers": ["INDEX"] + [m for m in (aligned.tickers if members else [])],
        "rows": int(index.n_dates),
        "first_date": str(index.dates[0]),
        "last_date": str(index.dates[-1]),
        "files": {p.name: _sha256(p) for p in sorted(written)},
    }
    man_path = out / "manifest.json"
    aio._atomic_write_text(man_path, json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    written.append(man_path)
    print(f"ingested {len(written) - 1} panel file(s), {index.n_dates} dates")
    return written


def _read_panels(out: Path) -> tuple[PricePanel, PricePanel | None]:
    pdir = _panel_dir(out)
    index_path = _require(pdir / "index.csv", "ingest")
    index = aio.load_csv(index_path, ticker="INDEX")
    member_files = sorted(p for p in pdir.glob("*.csv") if p.name != "index.csv")
    if not member_files:
        return index, None
    from .panel import align_panels

    members = align_panels([aio.load_csv(p, ticker=p.stem) for p in member_files])
    return index, members


# -------------------------------------------------------------- features


def cmd_features(args, cfg: RunConfig, out: Path) -> list[Path]:
    index, members = _read_panels(out)
    if cfg.features.catalog:
        catalog = load_catalog(cfg.features.catalog)
    else:
        catalog = load_default_catalog()
    if members is None:
        kept = []
        skipped = []
        for name, expr in catalog:
            if feats._needs_panel(expr):
                skipped.append(name)
            else:
                kept.append((name, expr))
        if skipped:
            warnings.warn(
                f"no constituents ingested; skipped {len(skipped)} "
                f"cross-sectional entries: {', '.join(skipped)}"
            )
        catalog = kept
        if not catalog:
            raise _UserError(
                "every catalog entry needs a constituents panel",
                "ingest member CSVs or use a catalog without cross-sectional entries",
            )
    matrix = feats.compute_features(
        index,
        catalog,
        constituents=members,
        reduce=cfg.features.reduce,
        jobs=cfg.features.jobs,
        use_adjusted_close=cfg.data.use_adjusted_close,
    )
    matrix = feats.classify(matrix)
    matrix = feats.duplication_filter(matrix)
    matrix = feats.correlation_prune(matrix)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "features.csv"
    meta_path = out / "features.meta"
    feats.export_features(matrix, csv_path, meta_path)
    dropped = [m.name for m in matrix.meta.values() if not m.kept]
    print(
        f"features: {len(matrix.names)} kept, {len(dropped)} dropped, "
        f"{matrix.n_rows} rows"
    )
    return [csv_path, meta_path]


# ---------------------------------------------------------------- labels


def _make_labels(cfg: RunConfig, index: PricePanel) -> lab.LabelVector:
    if cfg.labels.kind == "short":
        return lab.short_term_labels(
            index,
            threshold_pct=cfg.labels.threshold_pct,
            horizon_days=cfg.labels.horizon_days,
        )
    return lab.long_term_labels(
        index,
        lookback=cfg.labels.lookback,
        percentile=cfg.labels.percentile,
        horizon_days=cfg.labels.horizon_days,
    )


def cmd_label(args, cfg: RunConfig, out: Path) -> list[Path]:
    index, _ = _read_panels(out)
    vec = _make_labels(cfg, index)
    path = out / "labels.csv"
    lines = ["date,label"]
    for d, v in zip(vec.dates, vec.values):
        lines.append(f"{d},{int(v)}")
    aio._atomic_write_text(path, "\n".join(lines) + "\n")
    print(
        f"labels: {len(vec.values)} rows, positive rate "
        f"{vec.positive_rate():.4f} ({cfg.labels.kind}-term rule)"
    )
    return [path]


def _read_labels(out: Path) -> lab.LabelVector:
    path = _require(out / "labels.csv", "label")
    dates = []
    values = []
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().strip()
        if header != "date,label":
            raise _UserError(
                f"{path} does not look like a labels file",
                "regenerate it with `alphatrend label`",
            )
        for line in handle:
            d, v = line.strip().split(",")
            dates.append(np.datetime64(d, "D"))
            values.append(int(v))
    return lab.LabelVector(
        dates=np.array(dates, dtype="datetime64[D]"),
        values=np.array(values, dtype=np.int8),
        horizon=0,
        params={},
    )


# ----------------------------------------------------- dataset assembly


def _assemble(cfg: RunConfig, out: Path) -> tuple[Dataset, Dataset, FeatureMatrix]:
    """Join features with labels, split, and standardize on train stats."""
    csv_path = _require(out / "features.csv", "features")
    meta_path = out / "features.meta"
    matrix = feats.import_features(csv_path, meta_path if meta_path.exists() else None)
    vec = _read_labels(out)
    ds = join(matrix, vec)
    if cfg.split.method == "chronological":
        train, test = ev.chronological_split(ds, cfg.split.test_fraction)
    else:
        train, test = ev.shuffled_split(ds, cfg.split.test_fraction, seed=cfg.seed)
    std = feats.standardize(matrix, fit_range=(train.dates[0], train.dates[-1]))
    ds = join(std, vec)
    if cfg.split.method == "chronological":
        train, test = ev.chronological_split(ds, cfg.split.test_fraction)
    else:
        train, test = ev.shuffled_split(ds, cfg.split.test_fraction, seed=cfg.seed)
    return train, test, std


def _build_model(cfg: RunConfig, family: str):
    if family not in MODEL_FAMILIES:
        raise _UserError(
            f"unknown model family {family!r}",
            f"choose one of: {', '.join(sorted(MODEL_FAMILIES))}",
        )
    cls = MODEL_FAMILIES[family]
    params = dict(cfg.models.get(family, {}))
    if "random_state" in cls._param_names() and "random_state" not in params:
        params["random_state"] = cfg.seed
    return cls(**params)


def _maybe_rebalance(cfg: RunConfig, train: Dataset) -> Dataset:
    if not cfg.resample.enabled:
        return train
    counts = train.class_counts()
    if counts[0] == counts[1]:
        return train
    return rebalance(
        train,
        k_neighbors=cfg.resample.k_neighbors,
        target_ratio=cfg.resample.target_ratio,
        random_state=cfg.seed,
    )


# ---------------------------------------------------------------- search


def cmd_search(args, cfg: RunConfig, out: Path) -> list[Path]:
    family = args.family or cfg.search.model
    if family not in MODEL_FAMILIES:
        raise _UserError(
            f"unknown model family {family!r}",
            f"choose one of: {', '.join(sorted(MODEL_FAMILIES))}",
        )
    train, _, _ = _assemble(cfg, out)
    inner_train, val = ev.chronological_split(train, 0.2)
    inner_train = _maybe_rebalance(cfg, inner_train)
    cls = MODEL_FAMILIES[family]
    valid = set(cls._param_names())
    bad = [k for k in cfg.search.space if k not in valid]
    if bad:
        raise _UserError(
            f"search.space names parameters {family} does not have: {', '.join(bad)}",
            f"valid parameters: {', '.join(sorted(valid))}",
        )
    space = dict(cfg.search.space)
    if "random_state" in valid:
        space.setdefault("random_state", [cfg.seed])
    result = ev.random_search(
        cls,
        space,
        inner_train,
        val,
        n_iter=cfg.search.n_iter,
        seed=cfg.seed,
    )
    path = out / f"search_{family}.json"
    doc = {
        "family": family,
        "best_params": result.best_params,
        "best_score": result.best_score,
        "trials": [{"params": p, "score": s} for p, s in result.trials],
    }
    aio._atomic_write_text(path, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"search over {len(result.trials)} candidates: best f1 {result.best_score:.4f}")
    print(f"best params: {result.best_params}")
    return [path]


# ----------------------------------------------------------------- train


def cmd_train(args, cfg: RunConfig, out: Path) -> list[Path]:
    family = args.family
    train, _, _ = _assemble(cfg, out)
    train = _maybe_rebalance(cfg, train)
    model = _build_model(cfg, family)
    model.fit(train.X, train.y)
    path = out / "models" / f"{family}.json"
    save_model(model, path)
    m = ev.compute_metrics(train.y, model.predict(train.X, cutoff=cfg.evaluation.cutoff))
    print(f"trained {family} on {train.n_rows} rows; train accuracy {m.accuracy:.4f}")
    return [path]


# -------------------------------------------------------------- evaluate


def cmd_evaluate(args, cfg: RunConfig, out: Path) -> list[Path]:
    model_path = Path(args.model)
    if not model_path.exists():
        raise _UserError(
            f"model file not found: {model_path}",
            "train one with `alphatrend train --family <name>`",
        )
    model = load_model(model_path)
    _, test, _ = _assemble(cfg, out)
    scores = model.predict_proba(test.X)[:, 1]
    metrics = ev.compute_metrics(test.y, model.predict(test.X, cutoff=cfg.evaluation.cutoff))
    auc = ev.roc_auc(test.y, scores)
    family = model_path.stem
    doc = {
        "family": family,
        "rows": test.n_rows,
        "accuracy": metrics.accuracy,
        "precision": metrics.precision,
        "recall": metrics.recall,
        "f1": metrics.f1,
        "auc": auc,
        "confusion": {
            "tp": metrics.confusion.tp,
            "fp": metrics.confusion.fp,
            "tn": metrics.confusion.tn,
            "fn": metrics.confusion.fn,
        },
    }
    mpath = out / f"metrics_{family}.json"
    aio._atomic_write_text(mpath, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    th, fpr, tpr = ev.roc_curve(test.y, scores)
    rpath = out / f"roc_{family}.csv"
    ev.write_roc_csv(th, fpr, tpr, rpath)
    print(
        f"{family}: accuracy {metrics.accuracy:.4f} precision {metrics.precision:.4f} "
        f"recall {metrics.recall:.4f} auc {auc:.4f} on {test.n_rows} test rows"
    )
    return [mpath, rpath]


# --------------------------------------------------------------- compare


def cmd_compare(args, cfg: RunConfig, out: Path) -> list[Path]:
    train, test, _ = _assemble(cfg, out)
    train = _maybe_rebalance(cfg, train)
    rows = []
    curves = {}
    written = []
    importance_doc = {}
    fitted = {}
    for family in COMPARE_ORDER:
        if family == "random_forest_subset":
            base = fitted.get("random_forest")
            if base is None:
                warnings.warn("random_forest row missing; skipping the subset row")
                continue
            report = ev.importance_report(
                base.feature_importances_,
                train.feature_names,
                threshold=cfg.evaluation.importance_threshold,
            )
            names = [n for n, _ in report]
            importance_doc["random_forest"] = [
                {"feature": n, "importance": v} for n, v in report
            ]
            if not names:
                warnings.warn("no feature cleared the importance threshold; skipping subset row")
                continue
            cols = [train.feature_names.index(n) for n in names]
            model = ColumnSubsetClassifier(_build_model(cfg, "random_forest"), cols)
        else:
            model = _build_model(cfg, family)
        model.fit(train.X, train.y)
        fitted[family] = model
        scores = model.predict_proba(test.X)[:, 1]
        metrics = ev.compute_metrics(
            test.y, model.predict(test.X, cutoff=cfg.evaluation.cutoff)
        )
        auc = ev.roc_auc(test.y, scores)
        rows.append(
            ev.ComparisonRow(
                model=family,
                accuracy=metrics.accuracy,
                precision=metrics.precision,
                recall=metrics.recall,
                f1=metrics.f1,
                auc=auc,
            )
        )
        th, fpr, tpr = ev.roc_curve(test.y, scores)
        curves[family] = (fpr, tpr)
        rpath = out / f"roc_{family}.csv"
        ev.write_roc_csv(th, fpr, tpr, rpath)
        written.append(rpath)
        print(
            f"{family:22s} acc {metrics.accuracy:.4f} prec {metrics.precision:.4f} "
            f"rec {metrics.recall:.4f} f1 {metrics.f1:.4f} auc {auc:.4f}"
        )
    cpath = out / "comparison.csv"
    ev.write_comparison_csv(rows, cpath)
    written.append(cpath)
    spath = out / "overlay.svg"
    ev.write_roc_overlay_svg(curves, spath)
    written.append(spath)
    if importance_doc:
        ipath = out / "importance.json"
        aio._atomic_write_text(
            ipath, json.dumps(importance_doc, indent=1, sort_keys=True) + "\n"
        )
        written.append(ipath)
    return written


# ------------------------------------------------------------------ main


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alphatrend",
        description="Formula-driven trend classification over OHLCV panels.",
    )
    parser.add_argument("--config", help="TOML config file (defaults when omitted)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument(
        "--jobs",
        type=int,
        help="parallel workers for feature evaluation (default: all cores)",
    )
    parser.add_argument("--out", default="out", help="artifact directory (default: ./out)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate, fill, and trim raw OHLCV CSVs")
    p.add_argument("--index", required=True, help="index OHLCV CSV")
    p.add_argument("--members", nargs="*", help="constituent OHLCV CSVs")

    sub.add_parser("features", help="evaluate the alpha catalog and filter columns")
    sub.add_parser("label", help="compute trend labels from the index panel")

    p = sub.add_parser("search", help="random hyperparameter search on the train split")
    p.add_argument("--family", help="model family (default: config search.model)")

    p = sub.add_parser("train", help="fit one model family and persist it")
    p.add_argument("--family", required=True, choices=sorted(MODEL_FAMILIES))

    p = sub.add_parser("evaluate", help="score a saved model on the test split")
    p.add_argument("--model", required=True, help="path to a saved model JSON")

    sub.add_parser("compare", help="train and score the full model roster")
    return parser


_COMMANDS = {
    "ingest": cmd_ingest,
    "features": cmd_features,
    "label": cmd_label,
    "search": cmd_search,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = _load_cfg(args)
        if args.jobs is None and args.command == "features":
            cfg.features.jobs = max(1, os.cpu_count() or 1)
        outputs = _COMMANDS[args.command](args, cfg, out)
        _log_run(out, args.command, cfg, [p for p in outputs if p.exists()])
        return 0
    except _UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"hint: {exc.hint}", file=sys.stderr)
        return 2
    except (AlphaTrendError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
