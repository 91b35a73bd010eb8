"""Shared classifier plumbing: input checks, the predict contract, state export."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError, DataError
from ..features import SparseVector, stack


def as_matrix(X):
    """Float64 CSR or dense 2-D array; rejects non-finite values."""
    if isinstance(X, SparseVector):
        X = stack([X])
    if sp.issparse(X):
        X = sp.csr_matrix(X, dtype=np.float64)
        data = X.data
    else:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2:
            raise DataError(f"expected a 2-D feature matrix, got shape {X.shape}")
        data = X
    if not np.all(np.isfinite(data)):
        raise DataError("feature matrix contains non-finite values")
    return X


def to_dense(X) -> np.ndarray:
    return X.toarray() if sp.issparse(X) else X


@dataclass
class TrainingSet:
    X: object
    y: np.ndarray
    n_classes: int

    def __post_init__(self):
        self.X = as_matrix(self.X)
        self.y = np.asarray(self.y, dtype=np.int64)
        n, p = self.X.shape
        if len(self.y) != n:
            raise DataError(f"{n} feature rows but {len(self.y)} labels")
        if p < 1:
            raise DataError("feature dimension must be >= 1")
        if n == 0:
            raise DataError("empty training set")
        if self.y.min() < 0 or self.y.max() >= self.n_classes:
            raise DataError(f"labels must lie in 0..{self.n_classes - 1}")

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


class Classifier:
    """Base class. Subclasses set ``algorithm`` and ``defaults`` and implement
    ``_fit``, ``_scores`` (or ``_predict``), ``_arrays`` and ``_load_arrays``."""

    algorithm = ""
    defaults: dict = {}

    def __init__(self, **hp):
        unknown = set(hp) - set(self.defaults)
        if unknown:
            raise ConfigError(f"{self.algorithm}: unknown hyperparameter(s) {sorted(unknown)}")
        self.hp = {**self.defaults, **hp}
        self._validate()
        self.n_features: int | None = None
        self.n_classes: int | None = None
        self.warnings: list[str] = []
        self.history: list[float] = []

    def _validate(self):
        pass

    def fit(self, X, y, n_classes: int | None = None):
        y = np.asarray(y, dtype=np.int64)
        if n_classes is None:
            n_classes = int(y.max()) + 1 if len(y) else 0
        ts = TrainingSet(X, y, n_classes)
        self.n_features, self.n_classes = ts.n_features, ts.n_classes
        self._fit(ts)
        return self

    def _check(self, X):
        if self.n_features is None:
            raise DataError(f"{self.algorithm} model is not fitted")
        X = as_matrix(X)
        if X.shape[1] != self.n_features:
            raise DataError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def predict(self, X) -> np.ndarray:
        X = self._check(X)
        return self._predict(X)

    def predict_one(self, x) -> int:
        return int(self.predict(x)[0])

    def _predict(self, X) -> np.ndarray:
        # argmax returns the first maximum, i.e. the lowest class index on ties
        return np.argmax(self._scores(X), axis=1)

    # persistence -------------------------------------------------------
    def get_state(self) -> tuple[dict, dict[str, np.ndarray]]:
        meta = {
            "algorithm": self.algorithm,
            "hyperparameters": self.hp,
            "n_features": self.n_features,
            "n_classes": self.n_classes,
            "warnings": self.warnings,
            "history": [float(v) for v in self.history],
        }
        return meta, self._arrays()

    @classmethod
    def from_state(cls, meta: dict, arrays: dict[str, np.ndarray]):
        model = cls(**meta["hyperparameters"])
        model.n_features = meta["n_features"]
        model.n_classes = meta["n_classes"]
        model.warnings = list(meta.get("warnings", []))
        model.history = list(meta.get("history", []))
        model._load_arrays(arrays)
        return model
