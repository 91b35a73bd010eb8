"""Supervised learners sharing one fit/predict/state contract."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .ann import ANN
from .base import Classifier, TrainingSet
from .ensemble import BaggedTrees, GradientBoostedTrees, RandomForest
from .knn import KNN
from .linear import LogisticRegression, MultinomialNB
from .svm import SVM
from .tree import DecisionTree

ALGORITHMS: dict[str, type[Classifier]] = {
    cls.algorithm: cls
    for cls in (LogisticRegression, MultinomialNB, KNN, DecisionTree, BaggedTrees, RandomForest,
                ANN, SVM, GradientBoostedTrees)
}


def get_algorithm(name: str) -> type[Classifier]:
    try:
        return ALGORITHMS[name]
    except KeyError:
        raise ConfigError(f"unknown classifier {name!r}; choose from {sorted(ALGORITHMS)}") from None


def make_classifier(name: str, **hp) -> Classifier:
    return get_algorithm(name)(**hp)


def load_classifier(meta: dict, arrays: dict[str, np.ndarray]) -> Classifier:
    return get_algorithm(meta["algorithm"]).from_state(meta, arrays)


def _train(cls, ts: TrainingSet, hp: dict | None):
    return cls(**(hp or {})).fit(ts.X, ts.y, ts.n_classes)


def train_logistic_regression(ts, hp=None):
    return _train(LogisticRegression, ts, hp)


def train_multinomial_nb(ts, hp=None):
    return _train(MultinomialNB, ts, hp)


def train_knn(ts, hp=None):
    return _train(KNN, ts, hp)


def train_decision_tree(ts, hp=None):
    return _train(DecisionTree, ts, hp)


def train_bagged_trees(ts, hp=None):
    return _train(BaggedTrees, ts, hp)


def train_random_forest(ts, hp=None):
    return _train(RandomForest, ts, hp)


def train_ann(ts, hp=None):
    return _train(ANN, ts, hp)


def train_svm(ts, hp=None):
    return _train(SVM, ts, hp)


def train_gradient_boosted_trees(ts, hp=None):
    return _train(GradientBoostedTrees, ts, hp)


def predict(model: Classifier, x) -> int:
    return model.predict_one(x)


__all__ = [
    "ALGORITHMS", "ANN", "BaggedTrees", "Classifier", "DecisionTree", "GradientBoostedTrees", "KNN",
    "LogisticRegression", "MultinomialNB", "RandomForest", "SVM", "TrainingSet", "get_algorithm",
    "load_classifier", "make_classifier", "predict", "train_ann", "train_bagged_trees",
    "train_decision_tree", "train_gradient_boosted_trees", "train_knn", "train_logistic_regression",
    "train_multinomial_nb", "train_random_forest", "train_svm",
]
