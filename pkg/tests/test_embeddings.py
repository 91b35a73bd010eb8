import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from prodclass.corpus import TokenizedDoc
from prodclass.embeddings import (
    ALL_KINDS,
    make_vectorizer,
    vectorize,
)
from prodclass.embeddings.aggregate import embed_doc_avg, embed_doc_fasttext, embed_doc_sum
from prodclass.embeddings.glove import (
    GloveConfig,
    build_cooccurrence,
    objective,
    pair_loss,
    train_glove,
    weighting,
)
from prodclass.embeddings.table import (
    EmbeddingTable,
    SubwordConfig,
    char_ngrams,
    fnv1a_32,
)
from prodclass.embeddings.word2vec import (
    CBOW,
    SKIPGRAM,
    EmbeddingConfig,
    _Trainer,
    negative_pair_loss,
    softmax_pair_loss,
    train_fasttext,
    train_word2vec,
    training_examples,
)
from prodclass.errors import ConfigError, DataError, NotFittedError
from prodclass.features import tfidf_vectorize

from oracles import central_diff, rel_err


def D(*tokens):
    return TokenizedDoc(tuple(tokens))


def cosine(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def twin_corpus(seed=0, n=300):
    """Words u and v appear in exactly the same kinds of context."""
    rng = np.random.default_rng(seed)
    left, right = ["l0", "l1", "l2"], ["r0", "r1", "r2"]
    other = ["o0", "o1", "o2"]
    docs = []
    for _ in range(n):
        mid = ["u", "v"][rng.integers(2)]
        docs.append(D(left[rng.integers(3)], mid, right[rng.integers(3)]))
        docs.append(D(other[rng.integers(3)], "w", other[rng.integers(3)]))
    return docs


# tables / hashing ----------------------------------------------------------

def test_fnv1a_reference_values():
    assert fnv1a_32(b"") == 0x811C9DC5
    assert fnv1a_32(b"a") == 0xE40C292C
    assert fnv1a_32(b"foobar") == 0xBF9CF968


def test_char_ngrams_example():
    assert set(char_ngrams("ab", 2, 3)) == {"<a", "ab", "b>", "<ab", "ab>"}


@given(st.text(min_size=0, max_size=12), st.integers(1, 4), st.integers(0, 3))
def test_char_ngram_count(word, n_min, extra):
    n_max = n_min + extra
    L = len(word) + 2
    assert len(char_ngrams(word, n_min, n_max)) == sum(max(L - n + 1, 0) for n in range(n_min, n_max + 1))


def test_subword_config_validation():
    with pytest.raises(ConfigError):
        SubwordConfig(n_min=4, n_max=3)
    with pytest.raises(ConfigError):
        SubwordConfig(buckets=0)


def test_embedding_config_validation():
    for bad in ({"epochs": 0}, {"dim": 0}, {"window": 0}, {"learning_rate": 0}, {"mode": "x"}, {"negative": -1}):
        with pytest.raises(ConfigError):
            EmbeddingConfig(**bad)


# co-occurrence ---------------------------------------------------------------

def test_epoch_default_depends_on_mode():
    assert EmbeddingConfig(mode=CBOW).epochs == 50
    assert EmbeddingConfig(mode=SKIPGRAM).epochs == 25
    assert EmbeddingConfig(mode=SKIPGRAM, epochs=3).epochs == 3


def test_cooccurrence_examples():
    c = build_cooccurrence([D("a", "b")], window=4)
    assert c.get("a", "b") == c.get("b", "a") == 1.0
    assert build_cooccurrence([D("a", "b", "c")], window=1).get("a", "c") == 0.0
    assert build_cooccurrence([D("a", "b", "c")], window=4).get("a", "c") == 0.5
    with pytest.raises(ConfigError):
        build_cooccurrence([D("a")], window=0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.sampled_from("abcd"), min_size=1, max_size=8), min_size=1, max_size=10),
       st.integers(1, 5))
def test_cooccurrence_symmetric_and_brute(docs, window):
    c = build_cooccurrence([D(*d) for d in docs], window)
    brute = {}
    for d in docs:
        for p in range(len(d)):
            for q in range(len(d)):
                if p != q and abs(p - q) <= window:
                    key = (d[p], d[q])
                    brute[key] = brute.get(key, 0.0) + 1.0 / abs(p - q)
    got = c.as_dict()
    assert set(got) == set(brute)
    for k, x in brute.items():
        assert got[k] == pytest.approx(x, rel=1e-12)
        assert got[k] == got[(k[1], k[0])] and got[k] > 0


# GloVe -----------------------------------------------------------------------

def test_weighting_shape():
    assert weighting(100.0) == 1.0 and weighting(1000.0) == 1.0
    xs = np.linspace(0.01, 100, 50)
    assert np.all(np.diff(weighting(xs)) > 0)


@pytest.mark.parametrize("seed", range(5))
def test_glove_pair_gradient(seed):
    rng = np.random.default_rng(seed)
    w, wc = rng.normal(size=5), rng.normal(size=5)
    b, bc = rng.normal(size=1), rng.normal(size=1)
    x = float(rng.uniform(0.5, 150))
    _, gw, gwc, gb, gbc = pair_loss(w, wc, b[0], bc[0], x)
    f = lambda: pair_loss(w, wc, b[0], bc[0], x)[0]
    assert rel_err(gw, central_diff(f, w)) < 1e-5
    assert rel_err(gwc, central_diff(f, wc)) < 1e-5
    assert rel_err([gb], central_diff(f, b)) < 1e-5
    assert rel_err([gbc], central_diff(f, bc)) < 1e-5


def test_glove_single_pair_objective_goes_to_zero():
    c = build_cooccurrence([D("a", "b")])
    t = train_glove(c, GloveConfig(dim=4, epochs=300, learning_rate=0.1, optimizer="sgd", x_max=1.0))
    assert t.loss_history[-1] < 1e-8
    W, Wc, b, bc = t.params
    assert objective(t.params, c, 1.0, 0.75) == pytest.approx(t.loss_history[-1])
    np.testing.assert_allclose(t.vectors, W + Wc)


def test_glove_small_step_monotone():
    docs = [D("a", "b", "c"), D("b", "c")]
    c = build_cooccurrence(docs, window=2)
    assert len(c) <= 10
    t = train_glove(c, GloveConfig(dim=3, epochs=100, learning_rate=1e-3, optimizer="sgd", batch_size=10**6))
    h = np.array(t.loss_history)
    assert np.all(np.diff(h) <= 1e-15) and np.all(np.isfinite(h))


def test_glove_rejects_empty():
    with pytest.raises(DataError):
        train_glove(build_cooccurrence([D("a")]))
    with pytest.raises(ConfigError):
        GloveConfig(optimizer="adam")


# Word2Vec ---------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_softmax_pair_gradient(seed):
    rng = np.random.default_rng(seed)
    h, out = rng.normal(size=4), rng.normal(size=(6, 4))
    t = int(rng.integers(6))
    _, gh, gout = softmax_pair_loss(h, out, t)
    f = lambda: softmax_pair_loss(h, out, t)[0]
    assert rel_err(gh, central_diff(f, h)) < 1e-5
    assert rel_err(gout, central_diff(f, out)) < 1e-5


def test_negative_pair_gradient():
    rng = np.random.default_rng(1)
    h, out = rng.normal(size=4), rng.normal(size=(6, 4))
    negs = [1, 4, 4]
    _, gh, gout = negative_pair_loss(h, out, 2, negs)
    f = lambda: negative_pair_loss(h, out, 2, negs)[0]
    assert rel_err(gh, central_diff(f, h)) < 1e-5
    assert rel_err(gout, central_diff(f, out)) < 1e-5


@pytest.mark.parametrize("mode", [SKIPGRAM, CBOW])
def test_batch_step_is_summed_gradient(mode):
    """One mini-batch step moves every parameter by -lr times the batch-loss gradient."""
    rng = np.random.default_rng(3)
    id_docs = [rng.integers(0, 5, size=4) for _ in range(3)]
    A, targets = training_examples(id_docs, 5, mode, 2)
    theta0 = rng.normal(size=(5, 3))
    out0 = rng.normal(size=(5, 3))
    cfg = EmbeddingConfig(mode=mode, dim=3)

    def batch_loss(theta, out):
        h = A @ theta
        return sum(softmax_pair_loss(h[r], out, targets[r])[0] for r in range(len(targets)))

    tr = _Trainer(theta0.copy(), 5, cfg, None, rng)
    tr.out = out0.copy()
    lr = 1e-3
    loss = tr.batch_step(A, targets, lr)
    assert loss == pytest.approx(batch_loss(theta0, out0))
    th, ou = theta0.copy(), out0.copy()
    g_theta = central_diff(lambda: batch_loss(th, out0), th)
    g_out = central_diff(lambda: batch_loss(theta0, ou), ou)
    assert rel_err((theta0 - tr.theta) / lr, g_theta) < 1e-5
    assert rel_err((out0 - tr.out) / lr, g_out) < 1e-5


def test_training_examples_by_hand():
    A, t = training_examples([np.array([0, 1, 2])], 3, SKIPGRAM, 1)
    pairs = sorted(zip(A.indices.tolist(), t.tolist()))
    assert pairs == [(0, 1), (1, 0), (1, 2), (2, 1)]
    A, t = training_examples([np.array([0, 1, 2])], 3, CBOW, 1)
    np.testing.assert_allclose(A.toarray(), [[0, 1, 0], [0.5, 0, 0.5], [0, 1, 0]])
    assert t.tolist() == [0, 1, 2]


def test_initial_softmax_loss_is_log_vocab():
    docs = [D(*[f"w{i}" for i in np.random.default_rng(0).integers(0, 20, 6)]) for _ in range(30)]
    t = train_word2vec(docs, EmbeddingConfig(epochs=1, learning_rate=1e-9))
    assert t.loss_history[0] == pytest.approx(np.log(len(t)), rel=1e-3)


def test_single_word_docs_leave_vectors_at_init():
    docs = [D("a"), D("b")]
    t = train_word2vec(docs, EmbeddingConfig(epochs=1, seed=5))
    u = train_word2vec(docs, EmbeddingConfig(epochs=3, seed=5))
    np.testing.assert_array_equal(t.vectors, u.vectors)
    assert np.all(np.abs(t.vectors) <= 0.5 / 50)


def test_min_count_filters_everything():
    with pytest.raises(DataError):
        train_word2vec([D("a")], EmbeddingConfig(min_count=2))


def test_twin_words_become_similar():
    t = train_word2vec(twin_corpus(), EmbeddingConfig(mode=SKIPGRAM, epochs=20, seed=0))
    assert cosine(t["u"], t["v"]) >= 0.9
    assert cosine(t["u"], t["v"]) > cosine(t["u"], t["w"])
    assert all(np.isfinite(t.loss_history))


def test_word2vec_deterministic():
    docs = twin_corpus(n=40)
    cfg = EmbeddingConfig(epochs=2, seed=9, negative=3)
    np.testing.assert_array_equal(train_word2vec(docs, cfg).vectors, train_word2vec(docs, cfg).vectors)


# FastText -------------------------------------------------------------------

@pytest.fixture(scope="module")
def ft_table():
    docs = [D("lapte", "zuzu", "1l"), D("lapte", "covalact"), D("paine", "alba"), D("paine", "neagra", "500g")]
    return train_fasttext(docs, EmbeddingConfig(epochs=3, dim=8, seed=2), SubwordConfig(buckets=1000))


def test_fasttext_known_word_composition(ft_table):
    i = ft_table.index["lapte"]
    sub = np.mean([ft_table.bucket_vector(b) for b in ft_table.subword.bucket_ids("lapte")], axis=0)
    np.testing.assert_allclose(ft_table["lapte"], ft_table.word_vectors[i] + sub)


def test_fasttext_oov_is_bucket_mean(ft_table):
    v = ft_table.lookup("laptele")
    ids = ft_table.subword.bucket_ids("laptele")
    np.testing.assert_allclose(v, np.mean([ft_table.bucket_vector(b) for b in ids], axis=0))


@settings(max_examples=100, deadline=None)
@given(st.text(max_size=15))
def test_fasttext_lookup_total(ft_table, word):
    v = ft_table.lookup(word)
    assert v.shape == (8,) and np.all(np.isfinite(v))


# aggregation -----------------------------------------------------------------

@pytest.fixture
def small_table():
    return EmbeddingTable(["a", "b", "z"], np.array([[1.0, 2.0], [3.0, -1.0], [0.0, 0.0]]))


def test_sum_and_avg_examples(small_table):
    a, b = small_table["a"], small_table["b"]
    np.testing.assert_array_equal(embed_doc_sum(D("a", "a"), small_table), 2 * a)
    np.testing.assert_array_equal(embed_doc_sum(D("q", "r"), small_table), [0, 0])
    np.testing.assert_array_equal(embed_doc_sum(D("a", "b"), small_table), embed_doc_sum(D("b", "a"), small_table))
    np.testing.assert_array_equal(embed_doc_avg(D("a"), small_table), a)
    np.testing.assert_allclose(embed_doc_avg(D("a", "a", "b"), small_table), (2 * a + b) / 3)
    np.testing.assert_array_equal(embed_doc_avg(D("q"), small_table), [0, 0])
    neg = EmbeddingTable(["a", "b"], np.array([[1.0, 2.0], [-1.0, -2.0]]))
    np.testing.assert_array_equal(embed_doc_avg(D("a", "b"), neg), [0, 0])


def test_normalized_average(small_table):
    t = EmbeddingTable(["a", "z"], np.array([[0.0, 7.0], [0.0, 0.0]]))
    np.testing.assert_allclose(embed_doc_fasttext(D("a"), t), [0, 1])
    np.testing.assert_allclose(embed_doc_fasttext(D("a", "z"), t), [0, 1])
    np.testing.assert_array_equal(embed_doc_fasttext(D("z"), t), [0, 0])


@given(st.lists(st.sampled_from(["a", "b", "z", "q"]), max_size=8), st.randoms())
def test_aggregation_properties(tokens, rnd):
    t = EmbeddingTable(["a", "b", "z"], np.array([[1.0, 2.0], [3.0, -1.0], [0.0, 0.0]]))
    shuffled = list(tokens)
    rnd.shuffle(shuffled)
    np.testing.assert_allclose(embed_doc_sum(D(*tokens), t), embed_doc_sum(D(*shuffled), t))
    half = len(tokens) // 2
    np.testing.assert_allclose(embed_doc_sum(D(*tokens), t),
                               embed_doc_sum(D(*tokens[:half]), t) + embed_doc_sum(D(*tokens[half:]), t))
    assert np.linalg.norm(embed_doc_fasttext(D(*tokens), t)) <= 1 + 1e-12


# dispatch ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def fitted_all():
    docs = [D("lapte", "zuzu", "1l"), D("paine", "alba"), D("bere", "ursus", "0", "5l"), D("lapte", "batut")] * 3
    small = {"epochs": 1}
    arts = {k: make_vectorizer(k, **({} if k.is_sparse else small)).fit(docs) for k in ALL_KINDS}
    return docs, arts


def test_nine_kinds_dimensions(fitted_all):
    docs, arts = fitted_all
    assert len(arts) == 9
    dims = {k.value: arts[k].dim for k in arts}
    assert dims["count"] <= 3000 and dims["tfidf"] <= 3000
    assert sorted(v for k, v in dims.items() if k not in ("count", "tfidf")) == [50] * 7


def test_dispatch_identity(fitted_all):
    docs, arts = fitted_all
    tf = vectorize(docs[0], "tfidf", arts)
    assert tf.pairs() == tfidf_vectorize(docs[0], arts[ALL_KINDS[1]].vocab).pairs()
    g = vectorize(D("lapte", "paine"), "glove-sum", arts)
    np.testing.assert_array_equal(g, embed_doc_sum(D("lapte", "paine"), arts[ALL_KINDS[-1]].table))


def test_unfitted_and_bad_params():
    with pytest.raises(NotFittedError, match="glove-sum"):
        vectorize(D("a"), "glove-sum", {"glove-sum": make_vectorizer("glove-sum")})
    with pytest.raises(ConfigError):
        make_vectorizer("w2v-sg-sum", buckets=3)
    with pytest.raises(ConfigError):
        make_vectorizer("bogus")


def test_sparse_transform_matches_rows(fitted_all):
    docs, arts = fitted_all
    X = arts[ALL_KINDS[0]].transform(docs)
    assert sp.issparse(X) and X.shape[0] == len(docs)


def test_text_export(tmp_path, small_table):
    p = tmp_path / "v.txt"
    small_table.export_text(p)
    lines = p.read_text().splitlines()
    assert lines[0].split()[0] == "a" and len(lines) == 3 and len(lines[0].split()) == 3
