"""The nine document vectorizations behind one fit/transform interface."""

from __future__ import annotations

import dataclasses
from enum import Enum

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError, NotFittedError
from ..features import CountVectorizer, SparseVector, TfidfVectorizer, Vocabulary
from .aggregate import RULES
from .glove import GloveConfig, build_cooccurrence, train_glove
from .table import EmbeddingTable, SubwordConfig
from .word2vec import CBOW, SKIPGRAM, EmbeddingConfig, train_fasttext, train_word2vec


class VectorizationKind(str, Enum):
    COUNT = "count"
    TFIDF = "tfidf"
    W2V_CBOW_SUM = "w2v-cbow-sum"
    W2V_CBOW_AVG = "w2v-cbow-avg"
    W2V_SG_SUM = "w2v-sg-sum"
    W2V_SG_AVG = "w2v-sg-avg"
    FASTTEXT_CBOW = "fasttext-cbow"
    FASTTEXT_SG = "fasttext-sg"
    GLOVE_SUM = "glove-sum"

    @property
    def is_sparse(self) -> bool:
        return self in (VectorizationKind.COUNT, VectorizationKind.TFIDF)


ALL_KINDS = list(VectorizationKind)

# kind -> (model family, training mode, aggregation rule)
_EMBEDDING_KINDS = {
    VectorizationKind.W2V_CBOW_SUM: ("word2vec", CBOW, "sum"),
    VectorizationKind.W2V_CBOW_AVG: ("word2vec", CBOW, "avg"),
    VectorizationKind.W2V_SG_SUM: ("word2vec", SKIPGRAM, "sum"),
    VectorizationKind.W2V_SG_AVG: ("word2vec", SKIPGRAM, "avg"),
    VectorizationKind.FASTTEXT_CBOW: ("fasttext", CBOW, "l2avg"),
    VectorizationKind.FASTTEXT_SG: ("fasttext", SKIPGRAM, "l2avg"),
    VectorizationKind.GLOVE_SUM: ("glove", None, "sum"),
}

_EMB_FIELDS = {f.name for f in dataclasses.fields(EmbeddingConfig)} - {"mode"}
_SUB_FIELDS = {f.name for f in dataclasses.fields(SubwordConfig)}
_GLOVE_FIELDS = {f.name for f in dataclasses.fields(GloveConfig)}


def parse_kind(kind) -> VectorizationKind:
    try:
        return VectorizationKind(kind)
    except ValueError:
        raise ConfigError(f"unknown vectorization {kind!r}; choose from {[k.value for k in ALL_KINDS]}") from None


def allowed_params(kind) -> set[str]:
    kind = parse_kind(kind)
    if kind.is_sparse:
        return {"max_features", "max_ngram"}
    family = _EMBEDDING_KINDS[kind][0]
    if family == "glove":
        return _GLOVE_FIELDS
    if family == "fasttext":
        return _EMB_FIELDS | _SUB_FIELDS
    return set(_EMB_FIELDS)


def _check_params(kind, params):
    bad = set(params) - allowed_params(kind)
    if bad:
        raise ConfigError(f"unknown parameter(s) {sorted(bad)} for vectorization {kind.value!r}")


class EmbeddingVectorizer:
    def __init__(self, kind, **params):
        self.kind = parse_kind(kind)
        if self.kind.is_sparse:
            raise ConfigError(f"{self.kind.value} is not an embedding kind")
        _check_params(self.kind, params)
        self.family, self.mode, self.rule = _EMBEDDING_KINDS[self.kind]
        self.params = dict(params)
        self.table: EmbeddingTable | None = None

    def fit(self, docs):
        p = self.params
        if self.family == "glove":
            cfg = GloveConfig(**p)
            self.table = train_glove(build_cooccurrence(docs, cfg.window, cfg.min_count), cfg)
        elif self.family == "fasttext":
            cfg = EmbeddingConfig(mode=self.mode, **{k: v for k, v in p.items() if k in _EMB_FIELDS})
            sub = SubwordConfig(**{k: v for k, v in p.items() if k in _SUB_FIELDS})
            self.table = train_fasttext(docs, cfg, sub)
        else:
            self.table = train_word2vec(docs, EmbeddingConfig(mode=self.mode, **p))
        return self

    @property
    def dim(self) -> int:
        return self.table.dim

    def transform_one(self, doc) -> np.ndarray:
        if self.table is None:
            raise NotFittedError(f"vectorization {self.kind.value!r} has not been fitted")
        return RULES[self.rule](doc, self.table)

    def transform(self, docs) -> np.ndarray:
        if self.table is None:
            raise NotFittedError(f"vectorization {self.kind.value!r} has not been fitted")
        if not len(docs):
            return np.zeros((0, self.dim))
        return np.vstack([self.transform_one(d) for d in docs])


class SparseVectorizer:
    def __init__(self, kind, **params):
        self.kind = parse_kind(kind)
        _check_params(self.kind, params)
        self.params = dict(params)
        cls = CountVectorizer if self.kind is VectorizationKind.COUNT else TfidfVectorizer
        self.inner = cls(**params)

    @property
    def vocab(self) -> Vocabulary | None:
        return self.inner.vocab

    def fit(self, docs):
        self.inner.fit(docs)
        return self

    @property
    def dim(self) -> int:
        return self.inner.dim

    def transform_one(self, doc) -> SparseVector:
        if self.vocab is None:
            raise NotFittedError(f"vectorization {self.kind.value!r} has not been fitted")
        return self.inner._one(doc)

    def transform(self, docs) -> sp.csr_matrix:
        if self.vocab is None:
            raise NotFittedError(f"vectorization {self.kind.value!r} has not been fitted")
        return self.inner.transform(docs)


def make_vectorizer(kind, **params):
    kind = parse_kind(kind)
    return SparseVectorizer(kind, **params) if kind.is_sparse else EmbeddingVectorizer(kind, **params)


def vectorize(doc, kind, artifacts: dict):
    """Vectorize one document with the fitted artifact registered for ``kind``.

    ``artifacts`` maps kinds (or their string values) to fitted vectorizers.
    """
    kind = parse_kind(kind)
    vec = artifacts.get(kind, artifacts.get(kind.value))
    if vec is None:
        raise NotFittedError(f"no fitted artifact for vectorization {kind.value!r}")
    return vec.transform_one(doc)
