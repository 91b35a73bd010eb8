import json
import zipfile

import numpy as np
import pytest

from prodclass.archive import FORMAT_VERSION, ModelArchive, read_meta
from prodclass.corpus import LabelDictionary, RawRecord, tokenize_records
from prodclass.errors import DataError
from prodclass.experiments import probe_docs
from prodclass.generate import CorpusSpec, generate_records
from prodclass.tuning import RunSpec, fit_pipeline

KINDS = ["count", "tfidf", "w2v-cbow-avg", "fasttext-sg", "glove-sum"]
SMALL = {"w2v-cbow-avg": {"dim": 8, "epochs": 2}, "fasttext-sg": {"dim": 8, "epochs": 2},
         "glove-sum": {"dim": 8, "epochs": 2}}
SPEC = CorpusSpec(4, 150, seed=2)


def dense(X):
    return X.toarray() if hasattr(X, "toarray") else np.asarray(X)


@pytest.fixture(scope="module")
def corpus():
    recs = [RawRecord(t, l) for t, l in generate_records(SPEC)]
    labels = LabelDictionary.from_records(recs)
    return tokenize_records(recs, labels)[0], labels


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("algo", ["knn", "random_forest", "svm"])
def test_roundtrip_bit_identical(tmp_path, corpus, kind, algo):
    docs, labels = corpus
    hp = {"n_trees": 5} if algo == "random_forest" else {}
    vec, model = fit_pipeline(RunSpec(kind, algo, SMALL.get(kind, {}), hp), docs, labels.n_classes)
    arch = ModelArchive(labels, vec, model, {"note": "x"})
    path = arch.save(tmp_path / "m.zip")
    back = ModelArchive.load(path)
    probe = probe_docs(SPEC, labels, 1000)
    np.testing.assert_array_equal(arch.predict_docs(probe), back.predict_docs(probe))
    np.testing.assert_array_equal(dense(vec.transform(probe[:50])), dense(back.vectorizer.transform(probe[:50])))
    assert back.labels.labels == labels.labels and back.config == {"note": "x"}
    # deterministic bytes
    assert arch.save(tmp_path / "m2.zip").read_bytes() == path.read_bytes()


def test_meta_and_version_check(tmp_path, corpus):
    docs, labels = corpus
    vec, model = fit_pipeline(RunSpec("count", "multinomial_nb"), docs, labels.n_classes)
    path = ModelArchive(labels, vec, model, {}).save(tmp_path / "m.zip")
    meta = read_meta(path)
    assert meta["format_version"] == FORMAT_VERSION
    with zipfile.ZipFile(path) as zf:
        assert all(n == "meta.json" or n.endswith(".npy") for n in zf.namelist())
    meta["format_version"] = 99
    bad = tmp_path / "bad.zip"
    with zipfile.ZipFile(path) as src, zipfile.ZipFile(bad, "w") as dst:
        for n in src.namelist():
            dst.writestr(n, json.dumps(meta) if n == "meta.json" else src.read(n))
    with pytest.raises(DataError, match="version"):
        ModelArchive.load(bad)


def test_load_errors(tmp_path):
    with pytest.raises(DataError):
        ModelArchive.load(tmp_path / "missing.zip")
    junk = tmp_path / "junk.zip"
    junk.write_bytes(b"not a zip")
    with pytest.raises(DataError):
        ModelArchive.load(junk)
