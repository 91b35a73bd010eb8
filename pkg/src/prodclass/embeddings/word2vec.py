"""Word2Vec and FastText training (CBOW / skip-gram) with mini-batch SGD.

Both models share one trainer. The input representation of every word is a
row of a sparse composition matrix applied to the parameter table: the
identity for Word2Vec, and "own vector + mean of subword buckets" for
FastText. The output layer is a full softmax by default, or negative
sampling with a unigram^0.75 noise distribution.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError, DataError, NumericError
from .table import EmbeddingTable, FastTextTable, SubwordConfig, init_bucket, init_uniform

log = logging.getLogger(__name__)

CBOW = "cbow"
SKIPGRAM = "skipgram"


@dataclass(frozen=True)
class EmbeddingConfig:
    mode: str = SKIPGRAM
    dim: int = 50
    window: int = 4
    epochs: int | None = None  # None: 50 for CBOW, 25 for skip-gram
    learning_rate: float = 0.025
    min_count: int = 1
    negative: int = 0  # 0 = full softmax, otherwise negatives per example
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (CBOW, SKIPGRAM):
            raise ConfigError(f"mode must be {CBOW!r} or {SKIPGRAM!r}, got {self.mode!r}")
        if self.epochs is None:
            # skip-gram makes 2 * window predictions per token, CBOW one
            object.__setattr__(self, "epochs", 50 if self.mode == CBOW else 25)
        for name in ("dim", "window", "epochs", "min_count", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.negative < 0:
            raise ConfigError("negative must be >= 0")


def _tokens(doc) -> Sequence[str]:
    return doc.tokens if hasattr(doc, "tokens") else doc


def build_word_list(docs, min_count: int) -> list[str]:
    counts = Counter(w for d in docs for w in _tokens(d))
    words = sorted(w for w, c in counts.items() if c >= min_count)
    if not words:
        raise DataError(f"no words left after min_count={min_count} filtering")
    return words


def training_examples(id_docs: Sequence[np.ndarray], n_words: int, mode: str, window: int):
    """Sparse input rows over the word list, plus the word each row predicts.

    Skip-gram: one row per (center, context) pair, the center one-hot.
    CBOW: one row per position with a non-empty context, the row holding
    1/|context| on each context word.
    """
    rows, cols, vals, targets = [], [], [], []
    r = 0
    for ids in id_docs:
        L = len(ids)
        for i in range(L):
            ctx = [ids[j] for j in range(max(0, i - window), min(L, i + window + 1)) if j != i]
            if not ctx:
                continue
            if mode == SKIPGRAM:
                for c in ctx:
                    rows.append(r)
                    cols.append(ids[i])
                    vals.append(1.0)
                    targets.append(c)
                    r += 1
            else:
                w = 1.0 / len(ctx)
                for c in ctx:
                    rows.append(r)
                    cols.append(c)
                    vals.append(w)
                targets.append(ids[i])
                r += 1
    E = sp.csr_matrix((vals, (rows, cols)), shape=(r, n_words))
    E.sum_duplicates()
    return E, np.asarray(targets, dtype=np.int64)


def softmax_pair_loss(h: np.ndarray, out: np.ndarray, target: int):
    """Cross-entropy of predicting ``target`` from hidden vector ``h``.

    Returns (loss, d loss / d h, d loss / d out).
    """
    s = out @ h
    s = s - s.max()
    p = np.exp(s)
    p /= p.sum()
    loss = -np.log(p[target])
    g = p.copy()
    g[target] -= 1.0
    return loss, out.T @ g, np.outer(g, h)


def negative_pair_loss(h: np.ndarray, out: np.ndarray, target: int, negatives: Sequence[int]):
    """Negative-sampling loss: -log s(u_t.h) - sum log s(-u_n.h)."""
    idx = np.concatenate([[target], negatives]).astype(np.int64)
    sign = np.ones(len(idx))
    sign[1:] = -1.0
    z = sign * (out[idx] @ h)
    loss = np.sum(np.logaddexp(0.0, -z))
    g = -sign / (1.0 + np.exp(z))  # d loss / d score
    grad_out = np.zeros_like(out)
    np.add.at(grad_out, idx, g[:, None] * h[None, :])
    return loss, out[idx].T @ g, grad_out


class _Trainer:
    def __init__(self, theta: np.ndarray, n_words: int, cfg: EmbeddingConfig,
                 noise: np.ndarray | None, rng: np.random.Generator):
        self.theta = theta
        self.out = np.zeros((n_words, cfg.dim))
        self.cfg = cfg
        self.noise_cdf = None if noise is None else np.cumsum(noise / noise.sum())
        self.rng = rng

    def batch_step(self, A: sp.csr_matrix, targets: np.ndarray, lr: float) -> float:
        h = A @ self.theta
        if self.cfg.negative == 0:
            s = h @ self.out.T
            s -= s.max(axis=1, keepdims=True)
            p = np.exp(s)
            p /= p.sum(axis=1, keepdims=True)
            rows = np.arange(len(targets))
            loss = -np.log(p[rows, targets]).sum()
            p[rows, targets] -= 1.0
            grad_h = p @ self.out
            self.out -= lr * (p.T @ h)
        else:
            k = self.cfg.negative
            neg = np.searchsorted(self.noise_cdf, self.rng.random((len(targets), k)), side="right")
            neg = np.minimum(neg, len(self.noise_cdf) - 1)
            idx = np.concatenate([targets[:, None], neg], axis=1)
            sign = np.full(idx.shape, -1.0)
            sign[:, 0] = 1.0
            u = self.out[idx]
            z = sign * np.einsum("bkd,bd->bk", u, h)
            loss = np.logaddexp(0.0, -z).sum()
            g = -sign / (1.0 + np.exp(z))
            grad_h = np.einsum("bk,bkd->bd", g, u)
            np.add.at(self.out, idx.ravel(), -lr * (g[:, :, None] * h[:, None, :]).reshape(-1, h.shape[1]))
        entry_rows = np.repeat(np.arange(A.shape[0]), np.diff(A.indptr))
        np.add.at(self.theta, A.indices, -lr * A.data[:, None] * grad_h[entry_rows])
        return float(loss)

    def run(self, X_in: sp.csr_matrix, targets: np.ndarray) -> list[float]:
        cfg = self.cfg
        n = X_in.shape[0]
        history = []
        n_batches = max(1, -(-n // cfg.batch_size))
        total = cfg.epochs * n_batches
        step = 0
        for epoch in range(cfg.epochs):
            if n == 0:
                history.append(0.0)
                continue
            perm = self.rng.permutation(n)
            loss = 0.0
            for b in range(n_batches):
                rows = perm[b * cfg.batch_size : (b + 1) * cfg.batch_size]
                lr = cfg.learning_rate * max(1.0 - step / total, 1e-4)
                loss += self.batch_step(X_in[rows], targets[rows], lr)
                step += 1
            loss /= n
            if not np.isfinite(loss) or not np.all(np.isfinite(self.theta)):
                raise NumericError(f"embedding training diverged at epoch {epoch}; reduce learning_rate")
            history.append(loss)
            log.debug("epoch %d loss %.6f", epoch, loss)
        return history


def _unigram_noise(id_docs, n_words) -> np.ndarray:
    counts = np.bincount(np.concatenate(id_docs) if id_docs else np.zeros(0, np.int64), minlength=n_words)
    return counts.astype(np.float64) ** 0.75


def _prepare(docs, cfg: EmbeddingConfig):
    words = build_word_list(docs, cfg.min_count)
    index = {w: i for i, w in enumerate(words)}
    id_docs = [np.array([index[w] for w in _tokens(d) if w in index], dtype=np.int64) for d in docs]
    id_docs = [d for d in id_docs if len(d)]
    E, targets = training_examples(id_docs, len(words), cfg.mode, cfg.window)
    return words, id_docs, E, targets


def train_word2vec(docs, config: EmbeddingConfig | None = None) -> EmbeddingTable:
    """Train Word2Vec; the returned vectors are the input (projection) weights."""
    cfg = config or EmbeddingConfig()
    words, id_docs, E, targets = _prepare(docs, cfg)
    rng = np.random.default_rng(cfg.seed)
    theta = init_uniform(rng, (len(words), cfg.dim), cfg.dim)
    noise = _unigram_noise(id_docs, len(words)) if cfg.negative else None
    trainer = _Trainer(theta, len(words), cfg, noise, rng)
    history = trainer.run(E, targets)
    table = EmbeddingTable(words, trainer.theta, history)
    table.output_vectors = trainer.out
    return table


def train_fasttext(docs, config: EmbeddingConfig | None = None,
                   subword: SubwordConfig | None = None) -> FastTextTable:
    cfg = config or EmbeddingConfig()
    subword = subword or SubwordConfig()
    words, id_docs, E, targets = _prepare(docs, cfg)
    W = len(words)
    word_buckets = [subword.bucket_ids(w) for w in words]
    used = np.unique(np.concatenate(word_buckets)) if word_buckets else np.zeros(0, np.int64)
    pos = {int(b): i for i, b in enumerate(used)}
    rows, cols, vals = list(range(W)), list(range(W)), [1.0] * W
    for i, ids in enumerate(word_buckets):
        for b in ids:
            rows.append(i)
            cols.append(W + pos[int(b)])
            vals.append(1.0 / len(ids))
    comp = sp.csr_matrix((vals, (rows, cols)), shape=(W, W + len(used)))
    comp.sum_duplicates()
    rng = np.random.default_rng(cfg.seed)
    theta = np.empty((W + len(used), cfg.dim))
    theta[:W] = init_uniform(rng, (W, cfg.dim), cfg.dim)
    for i, b in enumerate(used):
        theta[W + i] = init_bucket(cfg.seed, int(b), cfg.dim)
    noise = _unigram_noise(id_docs, W) if cfg.negative else None
    trainer = _Trainer(theta, W, cfg, noise, rng)
    history = trainer.run((E @ comp).tocsr(), targets)
    table = FastTextTable(words, trainer.theta[:W], subword, used, trainer.theta[W:], cfg.seed, history)
    table.output_vectors = trainer.out
    return table
