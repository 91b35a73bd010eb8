"""Versioned model archive.

Layout (a ZIP container, deflate-compressed)::

    meta.json          format_version, label dictionary, pipeline config,
                       vectorizer metadata, model metadata
    vectorizer/<name>.npy
    model/<name>.npy

Every array is written in NumPy's .npy format with an explicit little-endian
dtype (``<f8`` for reals, ``<i8`` for integers, ``|b1`` for booleans), so the
files are byte-identical across platforms. Archives are written to a
temporary file and renamed into place, so a reader sees either the complete
archive or nothing.
"""

from __future__ import annotations

import io
import json
import os
import tempfile
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifiers import Classifier, load_classifier
from .corpus import LabelDictionary
from .embeddings import (
    EmbeddingTable,
    EmbeddingVectorizer,
    FastTextTable,
    SparseVectorizer,
    SubwordConfig,
    make_vectorizer,
    parse_kind,
)
from .errors import DataError
from .features import Vocabulary

FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (1,)


def _le(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.dtype.kind == "f":
        return a.astype("<f8")
    if a.dtype.kind in "iu":
        return a.astype("<i8")
    if a.dtype.kind == "b":
        return a.astype("|b1")
    raise DataError(f"cannot archive array of dtype {a.dtype}")


def _npy_bytes(a: np.ndarray) -> bytes:
    buf = io.BytesIO()
    np.lib.format.write_array(buf, _le(a), allow_pickle=False)
    return buf.getvalue()


# vectorizer state --------------------------------------------------------

def vectorizer_state(vec) -> tuple[dict, dict[str, np.ndarray]]:
    meta = {"kind": vec.kind.value, "params": dict(vec.params)}
    if isinstance(vec, SparseVectorizer):
        v = vec.vocab
        meta.update(terms=v.terms, n_docs=v.n_docs, max_features=v.max_features, max_ngram=v.max_ngram)
        return meta, {"df": v.df}
    table = vec.table
    meta["words"] = table.words
    meta["loss_history"] = [float(x) for x in table.loss_history]
    if isinstance(table, FastTextTable):
        sub = table.subword
        meta.update(subword={"n_min": sub.n_min, "n_max": sub.n_max, "buckets": sub.buckets}, seed=table.seed)
        return meta, {"word_vectors": table.word_vectors, "bucket_ids": table.bucket_ids,
                      "bucket_vectors": table.bucket_vectors}
    return meta, {"vectors": table.vectors}


def vectorizer_from_state(meta: dict, arrays: dict[str, np.ndarray]):
    kind = parse_kind(meta["kind"])
    vec = make_vectorizer(kind, **meta["params"])
    if isinstance(vec, SparseVectorizer):
        vec.inner.vocab = Vocabulary(meta["terms"], arrays["df"], meta["n_docs"], meta["max_features"],
                                     meta["max_ngram"])
        return vec
    assert isinstance(vec, EmbeddingVectorizer)
    if "subword" in meta:
        vec.table = FastTextTable(meta["words"], arrays["word_vectors"], SubwordConfig(**meta["subword"]),
                                  arrays["bucket_ids"], arrays["bucket_vectors"], meta["seed"],
                                  meta["loss_history"])
    else:
        vec.table = EmbeddingTable(meta["words"], arrays["vectors"], meta["loss_history"])
    return vec


# archive -------------------------------------------------------------------

@dataclass
class ModelArchive:
    labels: LabelDictionary
    vectorizer: object
    model: Classifier
    config: dict
    format_version: int = FORMAT_VERSION

    def predict_docs(self, docs) -> np.ndarray:
        if not len(docs):
            return np.zeros(0, dtype=np.int64)
        return self.model.predict(self.vectorizer.transform(docs))

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        vmeta, varrays = vectorizer_state(self.vectorizer)
        mmeta, marrays = self.model.get_state()
        meta = {
            "format_version": self.format_version,
            "labels": list(self.labels.labels),
            "config": self.config,
            "vectorizer": vmeta,
            "model": mmeta,
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".zip", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as fh, zipfile.ZipFile(fh, "w", zipfile.ZIP_DEFLATED) as zf:
                _write(zf, "meta.json", json.dumps(meta, indent=2, sort_keys=True, ensure_ascii=False, default=json_default).encode("utf-8"))
                for name in sorted(varrays):
                    _write(zf, f"vectorizer/{name}.npy", _npy_bytes(varrays[name]))
                for name in sorted(marrays):
                    _write(zf, f"model/{name}.npy", _npy_bytes(marrays[name]))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path

    @classmethod
    def load(cls, path: str | Path) -> "ModelArchive":
        path = Path(path)
        if not path.exists():
            raise DataError(f"archive not found: {path}")
        try:
            zf = zipfile.ZipFile(path)
        except zipfile.BadZipFile as exc:
            raise DataError(f"{path} is not a model archive: {exc}") from None
        with zf:
            meta = json.loads(zf.read("meta.json"))
            version = meta.get("format_version")
            if version not in SUPPORTED_VERSIONS:
                raise DataError(f"unsupported archive format version {version!r}; this build reads {SUPPORTED_VERSIONS}")
            varrays, marrays = {}, {}
            for name in zf.namelist():
                if not name.endswith(".npy"):
                    continue
                group, fname = name.split("/", 1)
                arr = np.lib.format.read_array(io.BytesIO(zf.read(name)), allow_pickle=False)
                (varrays if group == "vectorizer" else marrays)[fname[:-4]] = arr
        vec = vectorizer_from_state(meta["vectorizer"], varrays)
        model = load_classifier(meta["model"], marrays)
        return cls(LabelDictionary(meta["labels"]), vec, model, meta["config"], version)


def json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def _write(zf: zipfile.ZipFile, name: str, data: bytes) -> None:
    # fixed timestamp keeps archives byte-identical across runs
    info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
    info.compress_type = zipfile.ZIP_DEFLATED
    zf.writestr(info, data)


def read_meta(path: str | Path) -> dict:
    with zipfile.ZipFile(path) as zf:
        return json.loads(zf.read("meta.json"))
