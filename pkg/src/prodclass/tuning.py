"""k-fold cross-validation and exhaustive grid search over run specifications.

Every fold refits the vectorizer (vocabulary, idf, or embedding table) and the
classifier on the training folds only, so nothing learned ever sees the
held-out records.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .classifiers import get_algorithm, make_classifier
from .corpus import FoldPlan
from .embeddings import allowed_params, make_vectorizer, parse_kind
from .errors import ConfigError, DataError
from .evaluation import EvalReport, evaluate

log = logging.getLogger(__name__)

METRICS = ("accuracy", "macro_f1", "weighted_f1")


@dataclass(frozen=True)
class RunSpec:
    """One (vectorization, classifier, hyperparameters) configuration.

    ``seed`` is passed to the vectorizer and classifier when they take one and
    the parameters do not already fix it.
    """

    vectorization: str
    algorithm: str
    vec_params: dict = field(default_factory=dict)
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def validate(self) -> "RunSpec":
        kind = parse_kind(self.vectorization)
        bad = set(self.vec_params) - allowed_params(kind)
        if bad:
            raise ConfigError(f"vectorization {kind.value!r} does not accept {sorted(bad)}")
        cls = get_algorithm(self.algorithm)
        bad = set(self.hyperparameters) - set(cls.defaults)
        if bad:
            raise ConfigError(f"classifier {self.algorithm!r} does not accept {sorted(bad)}")
        cls(**self.classifier_params())  # range checks
        return self

    def vectorizer_params(self) -> dict:
        params = dict(self.vec_params)
        if "seed" in allowed_params(self.vectorization):
            params.setdefault("seed", self.seed)
        return params

    def classifier_params(self) -> dict:
        params = dict(self.hyperparameters)
        if "seed" in get_algorithm(self.algorithm).defaults:
            params.setdefault("seed", self.seed)
        return params

    def with_hyperparameters(self, **hp) -> "RunSpec":
        return replace(self, hyperparameters={**self.hyperparameters, **hp})

    def to_dict(self) -> dict:
        return {"vectorization": parse_kind(self.vectorization).value, "algorithm": self.algorithm,
                "vec_params": dict(self.vec_params), "hyperparameters": dict(self.hyperparameters),
                "seed": self.seed}


def fit_pipeline(spec: RunSpec, docs: Sequence, n_classes: int):
    """Fit the vectorizer and then the classifier on ``docs``; returns (vectorizer, model)."""
    vec = make_vectorizer(spec.vectorization, **spec.vectorizer_params()).fit(docs)
    X = vec.transform(docs)
    y = np.array([d.label for d in docs], dtype=np.int64)
    model = make_classifier(spec.algorithm, **spec.classifier_params()).fit(X, y, n_classes)
    return vec, model


def evaluate_pipeline(vec, model, docs: Sequence, n_classes: int) -> EvalReport:
    y = np.array([d.label for d in docs], dtype=np.int64)
    return evaluate(y, model.predict(vec.transform(docs)), n_classes)


@dataclass
class CVResult:
    spec: RunSpec
    reports: list[EvalReport]
    warnings: list[str] = field(default_factory=list)

    def values(self, metric: str) -> np.ndarray:
        return np.array([getattr(r, metric) for r in self.reports])

    def mean(self, metric: str) -> float:
        return float(self.values(metric).mean())

    def std(self, metric: str) -> float:
        """Population standard deviation over folds."""
        return float(self.values(metric).std())

    @property
    def k(self) -> int:
        return len(self.reports)

    def summary(self) -> dict:
        out = {}
        for m in METRICS:
            out[f"mean_{m}"] = self.mean(m)
            out[f"std_{m}"] = self.std(m)
        return out

    def records(self, **extra) -> list[dict]:
        """One machine-readable record per fold."""
        return [{**extra, "spec": self.spec.to_dict(), "fold": f, "accuracy": r.accuracy,
                 "macro_f1": r.macro_f1, "weighted_f1": r.weighted_f1}
                for f, r in enumerate(self.reports)]


def cross_validate(spec: RunSpec, docs: Sequence, plan: FoldPlan, n_classes: int | None = None) -> CVResult:
    if len(plan) != len(docs):
        raise DataError(f"fold plan covers {len(plan)} records but {len(docs)} were given")
    y = np.array([d.label for d in docs], dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    reports, warnings = [], []
    for f, (tr, te) in enumerate(plan.folds()):
        missing_test = sorted(set(range(n_classes)) - set(y[te].tolist()))
        missing_train = sorted(set(range(n_classes)) - set(y[tr].tolist()))
        if missing_test:
            warnings.append(f"fold {f}: held-out part has no instance of classes {missing_test}")
        if missing_train:
            warnings.append(f"fold {f}: training part has no instance of classes {missing_train}")
        train_docs = [docs[i] for i in tr]
        test_docs = [docs[i] for i in te]
        vec, model = fit_pipeline(spec, train_docs, n_classes)
        reports.append(evaluate_pipeline(vec, model, test_docs, n_classes))
    for w in warnings:
        log.warning(w)
    return CVResult(spec, reports, warnings)


class ParamGrid:
    """Cartesian product of per-hyperparameter value lists, in declaration order."""

    def __init__(self, grid: dict[str, Sequence]):
        if not grid:
            raise ConfigError("parameter grid is empty")
        for k, vals in grid.items():
            if not isinstance(vals, (list, tuple)) or len(vals) == 0:
                raise ConfigError(f"grid entry {k!r} needs a non-empty list of values")
        self.grid = {k: list(v) for k, v in grid.items()}

    def __len__(self) -> int:
        return int(np.prod([len(v) for v in self.grid.values()]))

    def __iter__(self):
        keys = list(self.grid)
        for combo in itertools.product(*(self.grid[k] for k in keys)):
            yield dict(zip(keys, combo))


DEFAULT_GRIDS = {
    "svm": {"C": [0.1, 1.0, 10.0], "gamma": [0.01, 0.1, 1.0]},
    "knn": {"k": [1, 3, 5, 7, 9]},
    "ann": {"hidden_units": [32, 64, 128], "learning_rate": [0.01, 0.1]},
    "gradient_boosted_trees": {"n_rounds": [50, 100], "max_depth": [4, 6], "learning_rate": [0.1, 0.3]},
}


def _cv_task(args):
    spec, docs, plan, n_classes = args
    return cross_validate(spec, docs, plan, n_classes)


def select_best(results: Sequence[CVResult]) -> int:
    """Index of the best result: mean accuracy, then mean weighted F1, then earliest."""
    best = 0
    for i, r in enumerate(results[1:], start=1):
        key = (r.mean("accuracy"), r.mean("weighted_f1"))
        ref = (results[best].mean("accuracy"), results[best].mean("weighted_f1"))
        if key > ref:
            best = i
    return best


def grid_search(base: RunSpec, grid: ParamGrid | dict, docs: Sequence, plan: FoldPlan,
                n_classes: int | None = None, workers: int = 1) -> tuple[RunSpec, list[CVResult]]:
    """Cross-validate every grid point; ``workers > 1`` evaluates points in separate processes."""
    grid = grid if isinstance(grid, ParamGrid) else ParamGrid(grid)
    specs = [base.with_hyperparameters(**point).validate() for point in grid]
    if n_classes is None:
        n_classes = max(d.label for d in docs) + 1
    tasks = [(s, docs, plan, n_classes) for s in specs]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cv_task, tasks))
    else:
        results = [_cv_task(t) for t in tasks]
    return specs[select_best(results)], results
