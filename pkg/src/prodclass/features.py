"""Bounded word/n-gram vocabulary with Count and TF-IDF vectors.

TF-IDF follows the plain textbook definition: tf is the raw count divided by
the number of terms in the document, idf is ``ln(N / df)`` without smoothing.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import TokenizedDoc, word_ngrams
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class SparseVector:
    dim: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape:
            raise ValueError("indices and values differ in length")
        if len(idx) and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.dim):
            raise ValueError("indices must be strictly increasing and < dim")
        if np.any(val == 0) or not np.all(np.isfinite(val)):
            raise ValueError("values must be finite and nonzero")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_dict(cls, dim: int, entries: dict[int, float]) -> "SparseVector":
        items = sorted((i, v) for i, v in entries.items() if v != 0)
        return cls(dim, np.array([i for i, _ in items], dtype=np.int64), np.array([v for _, v in items]))

    def pairs(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out


def stack(vectors: Sequence[SparseVector], dim: int | None = None) -> sp.csr_matrix:
    """Stack sparse vectors into a CSR matrix (one row per vector)."""
    if dim is None:
        dim = vectors[0].dim if vectors else 0
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(v.indices) for v in vectors])
    indices = np.concatenate([v.indices for v in vectors]) if vectors else np.zeros(0, np.int64)
    data = np.concatenate([v.values for v in vectors]) if vectors else np.zeros(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


class Vocabulary:
    """Term index with document frequencies, immutable once built."""

    def __init__(self, terms: Sequence[str], df: Sequence[int], n_docs: int, max_features: int, max_ngram: int):
        self.terms = list(terms)
        self.index = {t: i for i, t in enumerate(self.terms)}
        self.df = np.asarray(df, dtype=np.int64)
        self.n_docs = int(n_docs)
        self.max_features = int(max_features)
        self.max_ngram = int(max_ngram)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def doc_freq(self, term: str) -> int:
        return int(self.df[self.index[term]])

    def idf_vector(self) -> np.ndarray:
        return np.log(self.n_docs / self.df)

    def expand(self, doc: TokenizedDoc | Sequence[str]) -> list[str]:
        tokens = doc.tokens if isinstance(doc, TokenizedDoc) else doc
        return word_ngrams(tokens, self.max_ngram)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Vocabulary)
            and self.terms == other.terms
            and np.array_equal(self.df, other.df)
            and (self.n_docs, self.max_features, self.max_ngram)
            == (other.n_docs, other.max_features, other.max_ngram)
        )


def build_vocabulary(docs: Sequence[TokenizedDoc], max_features: int = 3000, max_ngram: int = 3) -> Vocabulary:
    """Collect all word n-grams; keep the ``max_features`` most frequent.

    Frequency is the total occurrence count over the corpus; ties go to the
    lexicographically smaller term.
    """
    if not docs:
        raise DataError("cannot build a vocabulary from zero documents")
    if max_features < 1:
        raise ConfigError(f"max_features must be >= 1, got {max_features}")
    total: Counter[str] = Counter()
    df: Counter[str] = Counter()
    for doc in docs:
        grams = word_ngrams(doc.tokens, max_ngram)
        total.update(grams)
        df.update(set(grams))
    ranked = sorted(total, key=lambda t: (-total[t], t))[:max_features]
    # Index order is lexicographic so the layout does not depend on tie ranks.
    terms = sorted(ranked)
    return Vocabulary(terms, [df[t] for t in terms], len(docs), max_features, max_ngram)


def _term_counts(doc, vocab: Vocabulary) -> tuple[Counter, int]:
    grams = vocab.expand(doc)
    return Counter(grams), len(grams)


def count_vectorize(doc, vocab: Vocabulary) -> SparseVector:
    counts, _ = _term_counts(doc, vocab)
    entries = {vocab.index[t]: float(c) for t, c in counts.items() if t in vocab.index}
    return SparseVector.from_dict(len(vocab), entries)


def tf(term: str, doc_terms: Sequence[str]) -> float:
    """Occurrences of ``term`` over the length of the expanded term list."""
    if len(doc_terms) == 0:
        raise DataError("tf of an empty document is undefined")
    return sum(1 for t in doc_terms if t == term) / len(doc_terms)


def idf(term: str, vocab: Vocabulary) -> float:
    if term not in vocab.index:
        raise DataError(f"term {term!r} is not in the vocabulary")
    return math.log(vocab.n_docs / vocab.doc_freq(term))


def tfidf_vectorize(doc, vocab: Vocabulary) -> SparseVector:
    counts, n_terms = _term_counts(doc, vocab)
    if n_terms == 0:
        return SparseVector.from_dict(len(vocab), {})
    idf_v = vocab.idf_vector()
    entries = {}
    for t, c in counts.items():
        j = vocab.index.get(t)
        if j is not None:
            entries[j] = (c / n_terms) * idf_v[j]
    return SparseVector.from_dict(len(vocab), entries)


class CountVectorizer:
    """Fit/transform wrapper used by the pipeline."""

    weighting = "count"

    def __init__(self, max_features: int = 3000, max_ngram: int = 3):
        self.max_features = max_features
        self.max_ngram = max_ngram
        self.vocab: Vocabulary | None = None

    def fit(self, docs: Sequence[TokenizedDoc]):
        self.vocab = build_vocabulary(docs, self.max_features, self.max_ngram)
        return self

    @property
    def dim(self) -> int:
        return len(self.vocab)

    def _one(self, doc) -> SparseVector:
        return count_vectorize(doc, self.vocab)

    def transform(self, docs) -> sp.csr_matrix:
        return stack([self._one(d) for d in docs], len(self.vocab))


class TfidfVectorizer(CountVectorizer):
    weighting = "tfidf"

    def _one(self, doc) -> SparseVector:
        return tfidf_vectorize(doc, self.vocab)
