"""Word vector tables, including the subword-composed FastText table."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import ConfigError

FNV_OFFSET = 0x811C9DC5
FNV_PRIME = 0x01000193


def fnv1a_32(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFF
    return h


def char_ngrams(word: str, n_min: int, n_max: int) -> list[str]:
    """Character n-grams of ``<word>``, grouped by n, each group left to right."""
    w = f"<{word}>"
    return [w[i : i + n] for n in range(n_min, n_max + 1) for i in range(len(w) - n + 1)]


def init_uniform(rng: np.random.Generator, shape, dim: int) -> np.ndarray:
    return rng.uniform(-0.5 / dim, 0.5 / dim, size=shape)


@dataclass(frozen=True)
class SubwordConfig:
    n_min: int = 3
    n_max: int = 6
    buckets: int = 2**18

    def __post_init__(self):
        if not 1 <= self.n_min <= self.n_max:
            raise ConfigError(f"need 1 <= n_min <= n_max, got {self.n_min}, {self.n_max}")
        if self.buckets < 1:
            raise ConfigError("buckets must be >= 1")

    def bucket_ids(self, word: str) -> np.ndarray:
        return np.array(
            [fnv1a_32(g.encode("utf-8")) % self.buckets for g in char_ngrams(word, self.n_min, self.n_max)],
            dtype=np.int64,
        )


class EmbeddingTable:
    """Fixed-dimension vectors for a closed word list. OOV lookups return None."""

    kind = "plain"

    def __init__(self, words: Sequence[str], vectors: np.ndarray, loss_history: Sequence[float] = ()):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise ValueError("vectors must be (len(words), dim)")
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        self.vectors = vectors
        self.loss_history = list(loss_history)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def __len__(self) -> int:
        return len(self.words)

    def lookup(self, word: str) -> np.ndarray | None:
        i = self.index.get(word)
        return None if i is None else self.vectors[i]

    def __getitem__(self, word: str) -> np.ndarray:
        v = self.lookup(word)
        if v is None:
            raise KeyError(word)
        return v

    def export_text(self, path: str | Path) -> None:
        """One ``word v1 ... vd`` line per word, repr-precision floats."""
        with open(path, "w", encoding="utf-8") as fh:
            for w in self.words:
                fh.write(w + " " + " ".join(repr(float(x)) for x in self[w]) + "\n")


class FastTextTable(EmbeddingTable):
    """Word vectors composed with hashed character n-gram buckets.

    A known word maps to its own vector plus the mean of its bucket vectors;
    an unknown word maps to the bucket mean alone. Only buckets touched during
    training are stored; any other bucket is regenerated from ``seed`` with
    the same initializer used at training time, so lookup is total.
    """

    kind = "fasttext"

    def __init__(
        self,
        words: Sequence[str],
        word_vectors: np.ndarray,
        subword: SubwordConfig,
        bucket_ids: np.ndarray,
        bucket_vectors: np.ndarray,
        seed: int,
        loss_history: Sequence[float] = (),
    ):
        self.word_vectors = np.asarray(word_vectors, dtype=np.float64)
        self.subword = subword
        self.bucket_ids = np.asarray(bucket_ids, dtype=np.int64)
        self.bucket_vectors = np.asarray(bucket_vectors, dtype=np.float64)
        self.seed = int(seed)
        self._bucket_pos = {int(b): i for i, b in enumerate(self.bucket_ids)}
        composed = np.array([self._subword_mean(w) for w in words]).reshape(len(words), -1)
        super().__init__(words, self.word_vectors + composed, loss_history)

    @property
    def dim(self) -> int:
        return self.word_vectors.shape[1]

    def bucket_vector(self, b: int) -> np.ndarray:
        i = self._bucket_pos.get(int(b))
        if i is not None:
            return self.bucket_vectors[i]
        return init_bucket(self.seed, int(b), self.dim)

    def _subword_mean(self, word: str) -> np.ndarray:
        ids = self.subword.bucket_ids(word)
        if len(ids) == 0:
            return np.zeros(self.word_vectors.shape[1])
        return np.mean([self.bucket_vector(b) for b in ids], axis=0)

    def lookup(self, word: str) -> np.ndarray:
        i = self.index.get(word)
        if i is not None:
            return self.vectors[i]
        return self._subword_mean(word)


def init_bucket(seed: int, bucket: int, dim: int) -> np.ndarray:
    """Deterministic initial vector of one subword bucket."""
    return init_uniform(np.random.default_rng([seed, 1, bucket]), dim, dim)
