"""One-hidden-layer ReLU network with a softmax output, trained by mini-batch SGD."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, NumericError
from .base import Classifier
from .linear import _log_softmax

PARAM_NAMES = ("W1", "b1", "W2", "b2")


def init_params(p: int, hidden: int, n_classes: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    # He-style uniform init for the ReLU layer, Glorot-style for the output layer
    a1 = np.sqrt(6.0 / p)
    a2 = np.sqrt(6.0 / (hidden + n_classes))
    return {
        "W1": rng.uniform(-a1, a1, size=(p, hidden)),
        "b1": np.zeros(hidden),
        "W2": rng.uniform(-a2, a2, size=(hidden, n_classes)),
        "b2": np.zeros(n_classes),
    }


def forward(params, X):
    Z1 = np.asarray(X @ params["W1"]) + params["b1"]
    H = np.maximum(Z1, 0.0)
    return Z1, H, H @ params["W2"] + params["b2"]


def ann_loss_grad(params: dict, X, y: np.ndarray, l2: float):
    """Mean cross-entropy + (l2/2)(|W1|^2 + |W2|^2) and gradients for every parameter."""
    n = X.shape[0]
    Z1, H, Z2 = forward(params, X)
    logp = _log_softmax(Z2)
    W1, W2 = params["W1"], params["W2"]
    loss = -logp[np.arange(n), y].mean() + 0.5 * l2 * (np.vdot(W1, W1) + np.vdot(W2, W2))
    D2 = np.exp(logp)
    D2[np.arange(n), y] -= 1.0
    D2 /= n
    D1 = (D2 @ W2.T) * (Z1 > 0)
    grads = {
        "W2": H.T @ D2 + l2 * W2,
        "b2": D2.sum(axis=0),
        "W1": np.asarray(X.T @ D1) + l2 * W1,
        "b1": D1.sum(axis=0),
    }
    return float(loss), grads


class ANN(Classifier):
    algorithm = "ann"
    defaults = {"hidden_units": 64, "epochs": 200, "batch_size": 32, "learning_rate": 0.1,
                "l2": 1e-4, "seed": 0}

    def _validate(self):
        hp = self.hp
        if hp["hidden_units"] < 1 or hp["epochs"] < 1 or hp["batch_size"] < 1:
            raise ConfigError("hidden_units, epochs and batch_size must be >= 1")
        if hp["learning_rate"] <= 0 or hp["l2"] < 0:
            raise ConfigError("learning_rate must be > 0 and l2 >= 0")

    def _fit(self, ts):
        hp = self.hp
        rng = np.random.default_rng(hp["seed"])
        n = len(ts.y)
        self.params = init_params(ts.n_features, hp["hidden_units"], ts.n_classes, rng)
        lr, l2, bs = float(hp["learning_rate"]), float(hp["l2"]), int(hp["batch_size"])
        self.history = []
        for _ in range(hp["epochs"]):
            order = rng.permutation(n)
            total = 0.0
            for a in range(0, n, bs):
                idx = order[a:a + bs]
                # divergence is detected from the loss below, not from warnings
                with np.errstate(over="ignore", invalid="ignore"):
                    loss, grads = ann_loss_grad(self.params, ts.X[idx], ts.y[idx], l2)
                if not np.isfinite(loss):
                    raise NumericError("ANN loss became non-finite; use a smaller learning_rate")
                total += loss * len(idx)
                for name in PARAM_NAMES:
                    self.params[name] -= lr * grads[name]
            self.history.append(total / n)

    def _scores(self, X):
        return forward(self.params, X)[2]

    def _arrays(self):
        return dict(self.params)

    def _load_arrays(self, arrays):
        self.params = {name: arrays[name] for name in PARAM_NAMES}
