"""GloVe: distance-weighted co-occurrence counts and weighted least squares fit."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError, NumericError
from .table import EmbeddingTable
from .word2vec import _tokens, build_word_list


@dataclass(frozen=True)
class GloveConfig:
    dim: int = 50
    window: int = 4
    epochs: int = 50
    learning_rate: float = 0.05
    x_max: float = 100.0
    alpha: float = 0.75
    min_count: int = 1
    batch_size: int = 32
    optimizer: str = "adagrad"  # or "sgd" (fixed step)
    seed: int = 0

    def __post_init__(self):
        for name in ("dim", "window", "epochs", "min_count", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.optimizer not in ("adagrad", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if not (self.learning_rate > 0 and self.x_max > 0 and self.alpha > 0):
            raise ConfigError("learning_rate, x_max and alpha must be > 0")


@dataclass
class CooccurrenceCounts:
    """Symmetric co-occurrence entries stored as parallel (i, j, x) arrays, both orientations."""

    words: list[str]
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def get(self, a: str, b: str) -> float:
        idx = {w: i for i, w in enumerate(self.words)}
        if a not in idx or b not in idx:
            return 0.0
        hit = (self.rows == idx[a]) & (self.cols == idx[b])
        return float(self.values[hit].sum())

    def as_dict(self) -> dict[tuple[str, str], float]:
        return {(self.words[i], self.words[j]): float(x) for i, j, x in zip(self.rows, self.cols, self.values)}


def build_cooccurrence(docs, window: int = 4, min_count: int = 1) -> CooccurrenceCounts:
    """One pass over the corpus; a pair at distance k adds 1/k to X_ij and X_ji."""
    if window < 1:
        raise ConfigError("window must be >= 1")
    words = build_word_list(docs, min_count)
    index = {w: i for i, w in enumerate(words)}
    acc: dict[tuple[int, int], float] = defaultdict(float)
    for d in docs:
        ids = [index[w] for w in _tokens(d) if w in index]
        for p in range(len(ids)):
            for q in range(p + 1, min(len(ids), p + window + 1)):
                w = 1.0 / (q - p)
                acc[ids[p], ids[q]] += w
                acc[ids[q], ids[p]] += w
    keys = sorted(acc)
    rows = np.array([k[0] for k in keys], dtype=np.int64)
    cols = np.array([k[1] for k in keys], dtype=np.int64)
    vals = np.array([acc[k] for k in keys], dtype=np.float64)
    return CooccurrenceCounts(words, rows, cols, vals)


def weighting(x, x_max: float = 100.0, alpha: float = 0.75):
    """(x / x_max)^alpha, capped at 1."""
    return np.minimum((np.asarray(x, dtype=np.float64) / x_max) ** alpha, 1.0)


def pair_loss(w, w_ctx, b, b_ctx, x, x_max=100.0, alpha=0.75):
    """One term f(x) (w.w~ + b + b~ - ln x)^2 and its gradients (w, w~, b, b~)."""
    d = w @ w_ctx + b + b_ctx - np.log(x)
    f = weighting(x, x_max, alpha)
    g = 2.0 * f * d
    return f * d * d, g * w_ctx, g * w, g, g


def objective(params, cooc: CooccurrenceCounts, x_max: float, alpha: float) -> float:
    W, Wc, b, bc = params
    i, j, x = cooc.rows, cooc.cols, cooc.values
    d = np.einsum("nd,nd->n", W[i], Wc[j]) + b[i] + bc[j] - np.log(x)
    return float(np.sum(weighting(x, x_max, alpha) * d * d))


def train_glove(cooc: CooccurrenceCounts, config: GloveConfig | None = None) -> EmbeddingTable:
    """Fit word/context vectors and biases; the table holds w + w~.

    Updates are per mini-batch of pairs, AdaGrad by default. The full
    objective is evaluated after every epoch and kept in ``loss_history``.
    """
    cfg = config or GloveConfig()
    if len(cooc) == 0:
        raise DataError("empty co-occurrence matrix")
    V, dim = len(cooc.words), cfg.dim
    rng = np.random.default_rng(cfg.seed)
    W = (rng.random((V, dim)) - 0.5) / dim
    Wc = (rng.random((V, dim)) - 0.5) / dim
    b = (rng.random(V) - 0.5) / dim
    bc = (rng.random(V) - 0.5) / dim
    # AdaGrad accumulators start at 1.
    gW, gWc, gb, gbc = np.ones_like(W), np.ones_like(Wc), np.ones(V), np.ones(V)
    i_all, j_all, x_all = cooc.rows, cooc.cols, cooc.values
    logx = np.log(x_all)
    f_all = weighting(x_all, cfg.x_max, cfg.alpha)
    n = len(x_all)
    lr = cfg.learning_rate
    history = []
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        for s in range(0, n, cfg.batch_size):
            sel = perm[s : s + cfg.batch_size]
            i, j = i_all[sel], j_all[sel]
            d = np.einsum("nd,nd->n", W[i], Wc[j]) + b[i] + bc[j] - logx[sel]
            g = 2.0 * f_all[sel] * d
            dW = g[:, None] * Wc[j]
            dWc = g[:, None] * W[i]
            if cfg.optimizer == "sgd":
                np.add.at(W, i, -lr * dW)
                np.add.at(Wc, j, -lr * dWc)
                np.add.at(b, i, -lr * g)
                np.add.at(bc, j, -lr * g)
            else:
                _adagrad(W, gW, i, dW, lr)
                _adagrad(Wc, gWc, j, dWc, lr)
                _adagrad(b, gb, i, g, lr)
                _adagrad(bc, gbc, j, g, lr)
        J = objective((W, Wc, b, bc), cooc, cfg.x_max, cfg.alpha)
        if not np.isfinite(J):
            raise NumericError(f"GloVe diverged at epoch {epoch}; reduce learning_rate")
        history.append(J)
    table = EmbeddingTable(cooc.words, W + Wc, history)
    table.params = (W, Wc, b, bc)
    return table


def _adagrad(param, accum, idx, grad, lr):
    # Sum gradients per row first so repeated rows in a batch take one step.
    rows, inv = np.unique(idx, return_inverse=True)
    G = np.zeros((len(rows),) + param.shape[1:])
    np.add.at(G, inv, grad)
    param[rows] -= lr * G / np.sqrt(accum[rows])
    accum[rows] += G * G
