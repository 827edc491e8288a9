"""Run configuration: TOML loading, validation, defaults, hashing.

Every tunable of the pipeline lives in one RunConfig tree so a run can
be reproduced from its config file and seed alone. Unknown keys are
rejected rather than ignored; a typo'd threshold that silently fell
back to a default would poison every number downstream.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError

SCHEMA_VERSION = 1


@dataclass
class DataConfig:
    use_adjusted_close: bool = False
    warmup_months: int = 16
    url_template: str = ""
    cache_dir: str = ""


@dataclass
class FeatureConfig:
    catalog: str = ""  # empty means the built-in expression list
    reduce: str = "mean"
    jobs: int = 1


@dataclass
class LabelConfig:
    kind: str = "short"
    threshold_pct: float = 0.1
    lookback: int = 60
    percentile: float = 75.0
    horizon_days: int = 1


@dataclass
class SplitConfig:
    method: str = "chronological"
    test_fraction: float = 0.2


@dataclass
class ResampleConfig:
    enabled: bool = True
    k_neighbors: int = 5
    target_ratio: float = 1.0


@dataclass
class SearchConfig:
    model: str = "decision_tree"
    n_iter: int = 20
    space: dict = field(default_factory=dict)


@dataclass
class EvaluationConfig:
    importance_threshold: float = 0.02
    cutoff: float = 0.5


def _default_model_params() -> dict:
    return {
        "logistic_regression": {},
        "decision_tree": {
            "min_samples_split": 4,
            "min_samples_leaf": 1,
            "max_depth": 5,
            "criterion": "gini",
        },
        "random_forest": {
            "n_estimators": 100,
            "min_samples_split": 4,
            "min_samples_leaf": 4,
            "max_depth": 5,
        },
        "knn": {"n_neighbors": 5},
        "gradient_boosting": {},
        "neural_network": {},
    }


def _default_search_space() -> dict:
    return {
        "max_depth": [3, 5, 7, 10],
        "min_samples_split": [2, 4, 8],
        "min_samples_leaf": [1, 2, 4],
        "criterion": ["gini", "entropy"],
    }


@dataclass
class RunConfig:
    seed: int = 42
    data: DataConfig = field(default_factory=DataConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    labels: LabelConfig = field(default_factory=LabelConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    resample: ResampleConfig = field(default_factory=ResampleConfig)
    models: dict = field(default_factory=_default_model_params)
    search: SearchConfig = field(default_factory=lambda: SearchConfig(space=_default_search_space()))
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)


_SECTIONS = {
    "data": DataConfig,
    "features": FeatureConfig,
    "labels": LabelConfig,
    "split": SplitConfig,
    "resample": ResampleConfig,
    "search": SearchConfig,
    "evaluation": EvaluationConfig,
}


def _check_type(dotted: str, value, expected):
    if expected is bool:
        ok = isinstance(value, bool)
    elif expected is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif expected is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif expected is str:
        ok = isinstance(value, str)
    elif expected is dict:
        ok = isinstance(value, dict)
    else:
        ok = True
    if not ok:
        raise ConfigError(
            f"{dotted} must be {expected.__name__}, got {type(value).__name__}"
        )
    if expected is float and isinstance(value, int):
        return float(value)
    return value


def _fill_section(name: str, cls, table: dict):
    out = cls()
    fields = {f.name: f.type for f in dataclasses.fields(cls)}
    for key, value in table.items():
        if key not in fields:
            raise ConfigError(f"unknown key {name}.{key}")
        ftype = fields[key]
        expected = {"bool": bool, "int": int, "float": float, "str": str, "dict": dict}.get(
            ftype if isinstance(ftype, str) else ftype.__name__
        )
        setattr(out, key, _check_type(f"{name}.{key}", value, expected))
    return out


def _validate_model_table(family: str, table: dict, defaults: dict) -> dict:
    from .models import MODEL_FAMILIES

    if family not in MODEL_FAMILIES:
        known = ", ".join(sorted(MODEL_FAMILIES))
        raise ConfigError(f"unknown key models.{family} (known families: {known})")
    valid = MODEL_FAMILIES[family]._param_names()
    merged = dict(defaults.get(family, {}))
    for key, value in table.items():
        if key not in valid:
            raise ConfigError(
                f"unknown key models.{family}.{key} "
                f"(valid: {', '.join(sorted(valid))})"
            )
        merged[key] = value
    return merged


def parse_config(doc: dict) -> RunConfig:
    """Build a validated RunConfig from a parsed TOML document."""
    if "schema_version" not in doc:
        raise ConfigError("config is missing schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {doc['schema_version']!r}; "
            f"this build reads version {SCHEMA_VERSION}"
        )
    cfg = RunConfig()
    for key, value in doc.items():
        if key == "schema_version":
            continue
        elif key == "seed":
            cfg.seed = _check_type("seed", value, int)
        elif key == "models":
            if not isinstance(value, dict):
                raise ConfigError("models must be a table of family tables")
            defaults = _default_model_params()
            for family, table in value.items():
                if not isinstance(table, dict):
                    raise ConfigError(f"models.{family} must be a table")
                cfg.models[family] = _validate_model_table(family, table, defaults)
        elif key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{key} must be a table")
            section = _fill_section(key, _SECTIONS[key], value)
            if key == "search" and not section.space:
                section.space = _default_search_space()
            setattr(cfg, key, section)
        else:
            raise ConfigError(f"unknown key {key}")
    _check_values(cfg)
    return cfg


def _check_values(cfg: RunConfig) -> None:
    if cfg.labels.kind not in ("short", "long"):
        raise ConfigError(f"labels.kind must be 'short' or 'long', got {cfg.labels.kind!r}")
    if cfg.split.method not in ("chronological", "shuffled"):
        raise ConfigError(
            f"split.method must be 'chronological' or 'shuffled', got {cfg.split.method!r}"
        )
    if not 0.0 < cfg.split.test_fraction < 1.0:
        raise ConfigError("split.test_fraction must be in (0, 1)")
    if cfg.features.reduce not in ("mean", "median"):
        raise ConfigError(f"features.reduce must be 'mean' or 'median', got {cfg.features.reduce!r}")
    if cfg.features.jobs < 1:
        raise ConfigError("features.jobs must be >= 1")
    if cfg.data.warmup_months < 0:
        raise ConfigError("data.warmup_months must be >= 0")
    if cfg.labels.horizon_days < 1:
        raise ConfigError("labels.horizon_days must be >= 1")
    if cfg.labels.lookback < 2:
        raise ConfigError("labels.lookback must be >= 2")
    if not 0.0 < cfg.labels.percentile < 100.0:
        raise ConfigError("labels.percentile must be in (0, 100)")
    if not 0.0 < cfg.evaluation.cutoff < 1.0:
        raise ConfigError("evaluation.cutoff must be in (0, 1)")
    from .models import MODEL_FAMILIES

    if cfg.search.model not in MODEL_FAMILIES:
        raise ConfigError(f"search.model must be a known family, got {cfg.search.model!r}")
    if cfg.search.n_iter < 1:
        raise ConfigError("search.n_iter must be >= 1")
    valid = MODEL_FAMILIES[cfg.search.model]._param_names()
    for pname, values in cfg.search.space.items():
        if pname not in valid:
            raise ConfigError(
                f"search.space.{pname} is not a parameter of {cfg.search.model}"
            )
        if not isinstance(values, list) or not values:
            raise ConfigError(f"search.space.{pname} must be a non-empty list")


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            doc = tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return parse_config(doc)


def default_config() -> RunConfig:
    return RunConfig()


def config_hash(cfg: RunConfig) -> str:
    """Stable sha256 of the full configuration."""
    doc = dataclasses.asdict(cfg)
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
