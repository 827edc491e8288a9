"""Save and load fitted models as versioned JSON."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import PersistenceError
from ..io import _atomic_write_text
from .forest import RandomForestClassifier
from .gbt import GradientBoostedTrees
from .knn import KNeighborsClassifier
from .logistic import LogisticRegression
from .mlp import MLPClassifier
from .tree import DecisionTreeClassifier

_FORMAT = "alphatrend-model"
_VERSION = 1

_FAMILIES = {
    "logistic_regression": LogisticRegression,
    "decision_tree": DecisionTreeClassifier,
    "random_forest": RandomForestClassifier,
    "knn": KNeighborsClassifier,
    "gradient_boosting": GradientBoostedTrees,
    "neural_network": MLPClassifier,
}


def _family_of(model) -> str:
    for name, cls in _FAMILIES.items():
        if type(model) is cls:
            return name
    raise PersistenceError(f"cannot persist a {type(model).__name__}")


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def save_model(model, path) -> None:
    """Write a fitted model to ``path``. Deterministic byte-for-byte."""
    model._check_fitted()
    doc = {
        "format": _FORMAT,
        "version": _VERSION,
        "family": _family_of(model),
        "params": model.get_params(),
        "state": model._get_state(),
    }
    text = json.dumps(doc, default=_plain, sort_keys=True, indent=1)
    _atomic_write_text(Path(path), text + "\n")


def load_model(path):
    """Rebuild a model saved by save_model."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise PersistenceError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != _FORMAT:
        raise PersistenceError(f"{path} is not a saved model")
    if doc.get("version") != _VERSION:
        raise PersistenceError(
            f"unsupported model file version {doc.get('version')!r} in {path}"
        )
    family = doc.get("family")
    cls = _FAMILIES.get(family)
    if cls is None:
        raise PersistenceError(f"unknown model family {family!r} in {path}")
    try:
        model = cls(**doc["params"])
        model._set_state(doc["state"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PersistenceError(f"malformed model file {path}: {exc}") from exc
    return model
