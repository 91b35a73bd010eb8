import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodclass.corpus import NGRAM_SEP, TokenizedDoc
from prodclass.errors import ConfigError, DataError
from prodclass.features import (
    CountVectorizer,
    SparseVector,
    TfidfVectorizer,
    build_vocabulary,
    count_vectorize,
    idf,
    stack,
    tf,
    tfidf_vectorize,
)

from oracles import naive_tfidf

docs_strategy = st.lists(
    st.lists(st.sampled_from(["a", "b", "c", "d", "e", "f"]), min_size=1, max_size=10),
    min_size=1, max_size=50,
)


def D(*tokens):
    return TokenizedDoc(tuple(tokens))


def test_vocabulary_counts_and_ties():
    docs = [D("a", "b"), D("a", "c")]
    v = build_vocabulary(docs, max_features=2, max_ngram=1)
    # a occurs twice; b and c tie and b wins lexicographically
    assert v.terms == ["a", "b"]
    assert v.doc_freq("a") == 2 and v.n_docs == 2


def test_vocabulary_includes_ngrams_and_bounds():
    v = build_vocabulary([D("x", "y", "z")], max_features=10, max_ngram=3)
    assert len(v) == 6 and NGRAM_SEP.join("xyz") in v
    with pytest.raises(DataError):
        build_vocabulary([])
    with pytest.raises(ConfigError):
        build_vocabulary([D("a")], max_features=0)


def test_count_vector_example():
    v = build_vocabulary([D("a", "a", "b")], max_ngram=1)
    assert count_vectorize(D("a", "a", "b"), v).pairs() == [(0, 2.0), (1, 1.0)]
    assert count_vectorize(D("zzz"), v).pairs() == []


def test_tf_and_idf_by_hand():
    terms = ["a", "a", "b", "a" + NGRAM_SEP + "a"]
    assert tf("a", terms) == 0.5
    v = build_vocabulary([D("a"), D("a"), D("b"), D("c")], max_ngram=1)
    assert idf("a", v) == pytest.approx(math.log(2))
    with pytest.raises(DataError):
        idf("nope", v)
    with pytest.raises(DataError):
        tf("a", [])


def test_term_in_every_doc_weighs_zero():
    v = build_vocabulary([D("a", "b"), D("a")], max_ngram=1)
    vec = tfidf_vectorize(D("a", "b"), v)
    # idf(a) = ln 1 = 0 -> entry dropped; b: tf 1/2 * ln 2
    assert vec.pairs() == [(1, pytest.approx(0.5 * math.log(2)))]


def test_tfidf_counts_out_of_vocabulary_terms_in_length():
    v = build_vocabulary([D("a"), D("b")], max_features=1, max_ngram=1)
    vec = tfidf_vectorize(D("a", "q"), v)
    assert vec.pairs() == [(0, pytest.approx(0.5 * math.log(2)))]


@settings(max_examples=40, deadline=None)
@given(docs_strategy, st.integers(1, 3), st.integers(1, 40))
def test_tfidf_matches_brute_force(docs, max_n, max_features):
    tdocs = [TokenizedDoc(tuple(d)) for d in docs]
    vec = TfidfVectorizer(max_features, max_n).fit(tdocs)
    M, terms = naive_tfidf(docs, max_n, max_features)
    assert vec.vocab.terms == terms
    np.testing.assert_allclose(vec.transform(tdocs).toarray(), M, rtol=0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(docs_strategy)
def test_count_rows_sum_to_in_vocab_terms(docs):
    tdocs = [TokenizedDoc(tuple(d)) for d in docs]
    cv = CountVectorizer(max_features=3000, max_ngram=2).fit(tdocs)
    X = cv.transform(tdocs)
    lengths = [len(d) + max(len(d) - 1, 0) for d in docs]
    np.testing.assert_array_equal(np.asarray(X.sum(axis=1)).ravel(), lengths)


def test_sparse_vector_validation_and_stack():
    with pytest.raises(ValueError):
        SparseVector(3, np.array([1, 0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        SparseVector(3, np.array([0]), np.array([0.0]))
    a = SparseVector.from_dict(4, {2: 1.5, 0: 0.0})
    assert a.pairs() == [(2, 1.5)]
    M = stack([a, SparseVector.from_dict(4, {3: 2.0})])
    np.testing.assert_array_equal(M.toarray(), [[0, 0, 1.5, 0], [0, 0, 0, 2.0]])
    assert stack([], dim=4).shape == (0, 4)
