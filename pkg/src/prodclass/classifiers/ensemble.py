"""Bagged trees, random forests and softmax gradient boosting."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, NumericError
from .base import Classifier, to_dense
from .tree import CRITERIA, BinnedData, Tree, fit_class_tree, grow_tree, pack_trees, unpack_trees


def majority_vote(votes: np.ndarray, n_classes: int) -> np.ndarray:
    """Row-wise most frequent label of an (n, n_voters) array; ties -> lowest label."""
    n = votes.shape[0]
    counts = np.zeros((n, n_classes), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(n), votes.shape[1]), votes.ravel()), 1)
    return np.argmax(counts, axis=1)


class BaggedTrees(Classifier):
    algorithm = "bagged_trees"
    defaults = {"n_trees": 100, "criterion": "gini", "max_depth": 30, "min_samples_leaf": 1,
                "bootstrap": True, "seed": 0}

    def _validate(self):
        if self.hp["n_trees"] < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.hp["criterion"] not in CRITERIA:
            raise ConfigError(f"criterion must be one of {CRITERIA}")

    def _mtry(self, p: int) -> int | None:
        return None

    def _fit(self, ts):
        data = BinnedData(ts.X)
        n = len(ts.y)
        mtry = self._mtry(ts.n_features)
        self.trees = []
        for t in range(self.hp["n_trees"]):
            rng = np.random.default_rng([self.hp["seed"], t])
            if self.hp["bootstrap"]:
                weight = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
            else:
                weight = np.ones(n)
            self.trees.append(fit_class_tree(
                ts.X, ts.y, ts.n_classes, weight=weight, criterion=self.hp["criterion"],
                max_depth=self.hp["max_depth"], min_samples_leaf=self.hp["min_samples_leaf"],
                mtry=mtry, rng=rng, data=data,
            ))

    def tree_votes(self, X) -> np.ndarray:
        X = to_dense(X)
        return np.column_stack([np.argmax(t.predict_value(X), axis=1) for t in self.trees])

    def _predict(self, X):
        return majority_vote(self.tree_votes(X), self.n_classes)

    def _arrays(self):
        return pack_trees(self.trees)

    def _load_arrays(self, arrays):
        self.trees = unpack_trees(arrays)


class RandomForest(BaggedTrees):
    """Bagging plus a fresh random feature subset of size ``mtry`` at every node.

    ``mtry=None`` means ceil(sqrt(p)). The subset is drawn from the features
    that are not constant within the node.
    """

    algorithm = "random_forest"
    defaults = {**BaggedTrees.defaults, "mtry": None}

    def _mtry(self, p: int) -> int:
        mtry = self.hp["mtry"]
        if mtry is None:
            return int(math.ceil(math.sqrt(p)))
        if not 1 <= mtry <= p:
            raise ConfigError(f"mtry must lie in 1..{p}, got {mtry}")
        return int(mtry)


def softmax(F: np.ndarray) -> np.ndarray:
    Z = F - F.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def cross_entropy(F: np.ndarray, y: np.ndarray) -> float:
    Z = F - F.max(axis=1, keepdims=True)
    lse = np.log(np.exp(Z).sum(axis=1))
    return float(np.mean(lse - Z[np.arange(len(y)), y]))


def newton_leaf(lam: float):
    def fn(S, W):
        denom = S[:, 1] + lam
        return np.where(denom > 0, -S[:, 0] / np.where(denom > 0, denom, 1.0), 0.0)[:, None]

    return fn


class GradientBoostedTrees(Classifier):
    """Second-order boosting of regression trees on the softmax loss.

    Each round fits one tree per class to the gradient g = p - y and hessian
    h = p(1 - p) of the cross-entropy; leaves output -G / (H + lambda) and
    splits maximize the usual Newton gain. Scores start at zero.
    """

    algorithm = "gradient_boosted_trees"
    defaults = {"n_rounds": 100, "learning_rate": 0.1, "max_depth": 6, "lambda": 1.0,
                "min_child_weight": 1.0, "seed": 0}

    def _validate(self):
        if self.hp["n_rounds"] < 1:
            raise ConfigError("n_rounds must be >= 1")
        if self.hp["learning_rate"] < 0 or self.hp["lambda"] < 0 or self.hp["max_depth"] < 0:
            raise ConfigError("learning_rate, lambda and max_depth must be >= 0")

    def _fit(self, ts):
        data = BinnedData(ts.X)
        n, C = len(ts.y), ts.n_classes
        lam, lr = float(self.hp["lambda"]), float(self.hp["learning_rate"])
        Y = np.zeros((n, C))
        Y[np.arange(n), ts.y] = 1.0
        F = np.zeros((n, C))
        leaf_fn = newton_leaf(lam)
        ones = np.ones(n)
        Xd = to_dense(ts.X)
        self.trees: list[Tree] = []
        self.history = [cross_entropy(F, ts.y)]
        for r in range(self.hp["n_rounds"]):
            P = softmax(F)
            H = np.maximum(P * (1.0 - P), 1e-16)
            G = P - Y
            update = np.zeros_like(F)
            for c in range(C):
                tree = grow_tree(data, np.column_stack([G[:, c], H[:, c]]), ones, "newton", leaf_fn,
                                 self.hp["max_depth"], 1, lam=lam,
                                 min_child_weight=float(self.hp["min_child_weight"]))
                self.trees.append(tree)
                update[:, c] = tree.predict_value(Xd)[:, 0]
            F += lr * update
            loss = cross_entropy(F, ts.y)
            if not np.isfinite(loss):
                raise NumericError("gradient boosting produced a non-finite loss; lower learning_rate")
            self.history.append(loss)

    def decision_function(self, X) -> np.ndarray:
        X = self._check(X)
        return self._scores(X)

    def _scores(self, X):
        C = self.n_classes
        F = np.zeros((X.shape[0], C))
        X = to_dense(X)
        lr = float(self.hp["learning_rate"])
        for i, tree in enumerate(self.trees):
            F[:, i % C] += lr * tree.predict_value(X)[:, 0]
        return F

    def _arrays(self):
        return pack_trees(self.trees)

    def _load_arrays(self, arrays):
        self.trees = unpack_trees(arrays)
