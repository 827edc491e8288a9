"""From-scratch classifiers sharing a fit/predict_proba/predict surface."""

from .base import BaseClassifier, ColumnSubsetClassifier
from .forest import RandomForestClassifier
from .gbt import GradientBoostedTrees
from .knn import KNeighborsClassifier, select_k
from .logistic import LogisticRegression
from .mlp import MLPClassifier
from .persist import load_model, save_model
from .smote import SMOTE, rebalance
from .tree import DecisionTreeClassifier

__all__ = [
    "BaseClassifier",
    "ColumnSubsetClassifier",
    "DecisionTreeClassifier",
    "GradientBoostedTrees",
    "KNeighborsClassifier",
    "LogisticRegression",
    "MLPClassifier",
    "RandomForestClassifier",
    "SMOTE",
    "load_model",
    "rebalance",
    "save_model",
    "select_k",
]

MODEL_FAMILIES = {
    "logistic_regression": LogisticRegression,
    "decision_tree": DecisionTreeClassifier,
    "random_forest": RandomForestClassifier,
    "knn": KNeighborsClassifier,
    "gradient_boosting": GradientBoostedTrees,
    "neural_network": MLPClassifier,
}
