"""Softmax logistic regression and multinomial naive Bayes."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError, DataError, NumericError
from .base import Classifier


def _log_softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    return Z - np.log(np.exp(Z).sum(axis=1, keepdims=True))


def logreg_loss_grad(W: np.ndarray, b: np.ndarray, X, y: np.ndarray, l2: float):
    """Mean cross-entropy + (l2/2)||W||^2 and its gradient w.r.t. (W, b).

    W has shape (C, p), b shape (C,). X may be dense or CSR.
    """
    n = X.shape[0]
    logp = _log_softmax(np.asarray(X @ W.T) + b)
    loss = -logp[np.arange(n), y].mean() + 0.5 * l2 * float(np.sum(W * W))
    D = np.exp(logp)
    D[np.arange(n), y] -= 1.0
    D /= n
    gW = np.asarray((X.T @ D).T) + l2 * W
    gb = D.sum(axis=0)
    return float(loss), gW, gb


class LogisticRegression(Classifier):
    """Multinomial logistic regression fit by full-batch gradient descent."""

    algorithm = "logistic_regression"
    defaults = {"learning_rate": 0.1, "epochs": 500, "l2": 1e-4}

    def _validate(self):
        if self.hp["l2"] < 0:
            raise ConfigError("l2 must be >= 0")
        if self.hp["epochs"] < 1 or self.hp["learning_rate"] <= 0:
            raise ConfigError("epochs must be >= 1 and learning_rate > 0")

    def _fit(self, ts):
        C, p = ts.n_classes, ts.n_features
        self.W = np.zeros((C, p))
        self.b = np.zeros(C)
        lr, l2 = float(self.hp["learning_rate"]), float(self.hp["l2"])
        self.history = []
        for _ in range(self.hp["epochs"]):
            with np.errstate(over="ignore", invalid="ignore"):
                loss, gW, gb = logreg_loss_grad(self.W, self.b, ts.X, ts.y, l2)
            if not np.isfinite(loss):
                raise NumericError("logistic regression loss became non-finite; reduce learning_rate")
            self.history.append(loss)
            self.W -= lr * gW
            self.b -= lr * gb
        with np.errstate(over="ignore", invalid="ignore"):
            loss = logreg_loss_grad(self.W, self.b, ts.X, ts.y, l2)[0]
        if not np.isfinite(loss):
            raise NumericError("logistic regression loss became non-finite; reduce learning_rate")
        self.final_loss = loss

    def _scores(self, X):
        return np.asarray(X @ self.W.T) + self.b

    def predict_proba(self, X) -> np.ndarray:
        return np.exp(_log_softmax(self._scores(self._check(X))))

    def _arrays(self):
        return {"W": self.W, "b": self.b}

    def _load_arrays(self, arrays):
        self.W, self.b = arrays["W"], arrays["b"]


class MultinomialNB(Classifier):
    """Multinomial naive Bayes with additive (Lidstone) smoothing ``alpha``.

    Feature values act as term counts and must be nonnegative, which rules out
    embedding-based vectors.
    """

    algorithm = "multinomial_nb"
    defaults = {"alpha": 1.0}

    def _validate(self):
        if not self.hp["alpha"] > 0:
            raise ConfigError("alpha must be > 0")

    @staticmethod
    def _check_nonnegative(X):
        if sp.issparse(X):
            bad = X.data < 0
            if bad.any():
                col = int(X.indices[np.flatnonzero(bad)[0]])
                raise DataError(f"multinomial naive Bayes needs nonnegative features; feature {col} is negative")
        else:
            neg = np.flatnonzero((X < 0).any(axis=0))
            if len(neg):
                raise DataError(f"multinomial naive Bayes needs nonnegative features; feature {int(neg[0])} is negative")

    def _fit(self, ts):
        self._check_nonnegative(ts.X)
        C, p = ts.n_classes, ts.n_features
        Y = sp.csr_matrix((np.ones(len(ts.y)), (ts.y, np.arange(len(ts.y)))), shape=(C, len(ts.y)))
        counts = np.asarray((Y @ ts.X).todense() if sp.issparse(ts.X) else Y @ ts.X)
        alpha = float(self.hp["alpha"])
        self.theta = (counts + alpha) / (counts.sum(axis=1, keepdims=True) + alpha * p)
        self.class_count = np.bincount(ts.y, minlength=C).astype(np.float64)
        with np.errstate(divide="ignore"):
            self.log_prior = np.log(self.class_count / self.class_count.sum())
        self.log_theta = np.log(self.theta)

    def _scores(self, X):
        self._check_nonnegative(X)
        return np.asarray(X @ self.log_theta.T) + self.log_prior

    def _arrays(self):
        return {"theta": self.theta, "class_count": self.class_count}

    def _load_arrays(self, arrays):
        self.theta, self.class_count = arrays["theta"], arrays["class_count"]
        with np.errstate(divide="ignore"):
            self.log_prior = np.log(self.class_count / self.class_count.sum())
        self.log_theta = np.log(self.theta)
