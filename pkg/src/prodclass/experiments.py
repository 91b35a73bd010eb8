"""Desk-scale surrogate of the full vectorization x classifier comparison.

A synthetic corpus is split 80/20 (stratified). Every vectorization is fitted
once on the training part. Each classifier is then trained on those features
and scored on the held-out part. Classifiers with a search grid are tuned on
an inner stratified holdout carved from the training part and refitted on the
whole training part with the winning point.

Every fitted configuration is also saved to a model archive, reloaded, and
checked for bit-identical predictions on a probe set of unseen names.
"""

from __future__ import annotations

import logging
import tempfile
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .archive import ModelArchive
from .classifiers import make_classifier
from .corpus import LabelDictionary, RawRecord, split_indices, tokenize_records
from .embeddings import ALL_KINDS, make_vectorizer, parse_kind
from .errors import ProdclassError
from .evaluation import evaluate
from .generate import CorpusSpec, generate_records
from .tuning import ParamGrid

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassifierSetup:
    name: str
    algorithm: str
    hyperparameters: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    sparse_only: bool = False


# sparse keyword features need deep trees; the leaf grid handles dense ones
_LEAF = {"min_samples_leaf": [1, 4]}
_C_GAMMA = {"C": [0.1, 1.0, 10.0], "gamma": [0.01, 0.1, 1.0]}

# Learning rate for logistic regression is searched because the feature scales
# differ by two orders of magnitude across vectorizations.
SETUPS = (
    ClassifierSetup("logreg", "logistic_regression", grid={"learning_rate": [0.1, 1.0, 5.0]}),
    ClassifierSetup("naive_bayes", "multinomial_nb", sparse_only=True),
    ClassifierSetup("knn", "knn", grid={"k": [1, 3, 5, 7, 9], "metric": ["euclidean", "cosine"]}),
    ClassifierSetup("tree_gini", "decision_tree", {"criterion": "gini", "max_depth": 300},
                   grid=_LEAF),
    ClassifierSetup("tree_infogain", "decision_tree", {"criterion": "info_gain", "max_depth": 300},
                   grid=_LEAF),
    ClassifierSetup("tree_gainratio", "decision_tree", {"criterion": "gain_ratio", "max_depth": 300},
                   grid=_LEAF),
    ClassifierSetup("bagged_trees", "bagged_trees", {"max_depth": 300}),
    ClassifierSetup("random_forest", "random_forest", {"max_depth": 300}),
    ClassifierSetup("ann", "ann", grid={"hidden_units": [32, 64, 128], "learning_rate": [0.01, 0.1]}),
    ClassifierSetup("svm_radial", "svm", {"kernel": "radial"}, grid=_C_GAMMA),
    ClassifierSetup("svm_sigmoid", "svm", {"kernel": "sigmoid"}, grid=_C_GAMMA),
    ClassifierSetup("gbt", "gradient_boosted_trees"),
)

SURROGATE_CORPUS = CorpusSpec(classes=15, size=2500, seed=0, noise_rate=0.05, imbalance=3.0)


@dataclass
class ConfigResult:
    vectorization: str
    classifier: str
    hyperparameters: dict
    accuracy: float
    macro_f1: float
    weighted_f1: float
    seconds: float
    roundtrip_ok: bool | None = None
    error: str | None = None

    @property
    def completed(self) -> bool:
        return self.error is None


@dataclass
class SurrogateResult:
    results: list[ConfigResult]
    vectorizer_seconds: dict[str, float]
    total_seconds: float

    def best(self) -> ConfigResult:
        done = [r for r in self.results if r.completed]
        return max(done, key=lambda r: r.accuracy)

    def worst(self) -> ConfigResult:
        done = [r for r in self.results if r.completed]
        return min(done, key=lambda r: r.accuracy)

    def table(self) -> str:
        """Markdown grid of held-out accuracy, vectorizations as rows."""
        kinds = list(dict.fromkeys(r.vectorization for r in self.results))
        names = list(dict.fromkeys(r.classifier for r in self.results))
        cell = {(r.vectorization, r.classifier): r for r in self.results}
        lines = ["| vectorization | " + " | ".join(names) + " |", "|---" * (len(names) + 1) + "|"]
        for k in kinds:
            row = []
            for n in names:
                r = cell.get((k, n))
                row.append("" if r is None else ("error" if not r.completed else f"{r.accuracy:.3f}"))
            lines.append(f"| {k} | " + " | ".join(row) + " |")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        best, worst = self.best(), self.worst()
        return {
            "total_seconds": self.total_seconds,
            "vectorizer_seconds": self.vectorizer_seconds,
            "best": {"vectorization": best.vectorization, "classifier": best.classifier, "accuracy": best.accuracy},
            "worst": {"vectorization": worst.vectorization, "classifier": worst.classifier,
                      "accuracy": worst.accuracy},
            "results": [vars(r) for r in self.results],
        }


def _holdout_select(setup: ClassifierSetup, X, y, n_classes: int, seed: int) -> dict:
    """Best grid point by inner-holdout accuracy (first point wins ties)."""
    inner_tr, inner_va = split_indices(y, 0.2, seed=seed + 1)
    best_hp, best_acc = None, -1.0
    for point in ParamGrid(setup.grid):
        hp = {**setup.hyperparameters, **point}
        try:
            model = make_classifier(setup.algorithm, **_seeded(setup.algorithm, hp, seed))
            model.fit(X[inner_tr], y[inner_tr], n_classes)
            acc = float(np.mean(model.predict(X[inner_va]) == y[inner_va]))
        except ProdclassError as exc:
            log.info("grid point %s of %s failed: %s", point, setup.name, exc)
            continue
        if acc > best_acc:
            best_hp, best_acc = hp, acc
    return best_hp if best_hp is not None else dict(setup.hyperparameters)


def _seeded(algorithm: str, hp: dict, seed: int) -> dict:
    from .classifiers import get_algorithm

    if "seed" in get_algorithm(algorithm).defaults:
        return {"seed": seed, **hp}
    return hp


def probe_docs(spec: CorpusSpec, labels: LabelDictionary, n: int = 1000):
    """Fresh names over the training lexicon; pack sizes and noise give some unseen terms."""
    probe = replace(spec, size=max(n, spec.classes), name_seed=spec.seed + 7919)
    recs = [RawRecord(t, lab) for t, lab in generate_records(probe)]
    docs, _ = tokenize_records(recs, labels)
    return docs[:n]


def run_surrogate(spec: CorpusSpec = SURROGATE_CORPUS, kinds=None, setups=SETUPS, seed: int = 0,
                  roundtrip: bool = True, archive_dir: str | Path | None = None, progress=None) -> SurrogateResult:
    t_start = time.perf_counter()
    recs = [RawRecord(t, lab) for t, lab in generate_records(spec)]
    labels = LabelDictionary.from_records(recs)
    docs, _ = tokenize_records(recs, labels)
    y_all = np.array([d.label for d in docs], dtype=np.int64)
    tr, te = split_indices(y_all, 0.2, seed=seed)
    train_docs, test_docs = [docs[i] for i in tr], [docs[i] for i in te]
    y_tr, y_te = y_all[tr], y_all[te]
    C = labels.n_classes
    probes = probe_docs(spec, labels) if roundtrip else []

    results, vec_seconds = [], {}
    fitted_tables = {}
    tmp_ctx = tempfile.TemporaryDirectory() if archive_dir is None else None
    adir = Path(archive_dir or tmp_ctx.name)
    try:
        for kind in [parse_kind(k) for k in (kinds or ALL_KINDS)]:
            t0 = time.perf_counter()
            vec = make_vectorizer(kind, **({} if kind.is_sparse else {"seed": seed}))
            key = kind.value.rsplit("-", 1)[0] if kind.value.endswith(("-sum", "-avg")) else kind.value
            if not kind.is_sparse and key in fitted_tables:
                vec.table = fitted_tables[key]  # sum and avg share one trained table
            else:
                vec.fit(train_docs)
                if not kind.is_sparse:
                    fitted_tables[key] = vec.table
            X_tr, X_te = vec.transform(train_docs), vec.transform(test_docs)
            vec_seconds[kind.value] = time.perf_counter() - t0
            for setup in setups:
                if setup.sparse_only and not kind.is_sparse:
                    continue
                t1 = time.perf_counter()
                hp = dict(setup.hyperparameters)
                try:
                    if setup.grid:
                        hp = _holdout_select(setup, X_tr, y_tr, C, seed)
                    model = make_classifier(setup.algorithm, **_seeded(setup.algorithm, hp, seed))
                    model.fit(X_tr, y_tr, C)
                    pred = model.predict(X_te)
                    rep = evaluate(y_te, pred, C)
                    res = ConfigResult(kind.value, setup.name, hp, rep.accuracy, rep.macro_f1, rep.weighted_f1, 0.0)
                    if roundtrip:
                        res.roundtrip_ok = check_roundtrip(ModelArchive(labels, vec, model, {"kind": kind.value,
                                                                                              "setup": setup.name}),
                                                           probes, adir / f"{kind.value}__{setup.name}.zip")
                except ProdclassError as exc:
                    res = ConfigResult(kind.value, setup.name, hp, float("nan"), float("nan"), float("nan"), 0.0,
                                       error=f"{type(exc).__name__}: {exc}")
                res.seconds = time.perf_counter() - t1
                results.append(res)
                if progress:
                    progress(res)
    finally:
        if tmp_ctx is not None:
            tmp_ctx.cleanup()
    return SurrogateResult(results, vec_seconds, time.perf_counter() - t_start)


def check_roundtrip(archive: ModelArchive, docs, path: Path) -> bool:
    """Save, reload, and compare predictions element-wise."""
    before = archive.predict_docs(docs)
    archive.save(path)
    after = ModelArchive.load(path).predict_docs(docs)
    return before.dtype == after.dtype and np.array_equal(before, after)
