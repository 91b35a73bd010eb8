"""End-to-end runs: train/evaluate, cross-validate, grid search, predict.

Outputs land in the configured directory only when complete. Each run also
appends line-delimited JSON records (one object per line) to ``run.jsonl``.
"""

from __future__ import annotations

import csv
import io
import json
import os
import platform
import shutil
import tempfile
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .archive import ModelArchive, json_default
from .config import PipelineConfig
from .corpus import (
    LabelDictionary,
    TokenizedDoc,
    TokenizerConfig,
    load_csv,
    make_folds,
    split_indices,
    tokenize,
    tokenize_records,
)
from .errors import ConfigError, DataError, ProdclassError
from .evaluation import EvalReport
from .tuning import DEFAULT_GRIDS, CVResult, ParamGrid, RunSpec, cross_validate, evaluate_pipeline, fit_pipeline, grid_search


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, default=json_default) + "\n"


class RunLog:
    """Append-only line-delimited JSON log."""

    def __init__(self, path: Path | None):
        self.path = path
        self.t0 = time.perf_counter()

    def write(self, event: str, **fields) -> None:
        if self.path is None:
            return
        rec = {"event": event, "elapsed_s": round(time.perf_counter() - self.t0, 6), **fields}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False, default=json_default) + "\n")


def environment(config: PipelineConfig) -> dict:
    return {"seed": config.seed, "workers": config.workers, "python": platform.python_version(),
            "numpy": np.__version__, "platform": platform.platform()}


@contextmanager
def stage(name: str):
    """Re-raise errors with the failing stage name prepended (type preserved)."""
    try:
        yield
    except ProdclassError as exc:
        raise type(exc)(f"[{name}] {exc}") from exc
    except (OSError, ValueError, ArithmeticError) as exc:
        raise DataError(f"[{name}] {type(exc).__name__}: {exc}") from exc


@contextmanager
def staged_outputs(output_dir: Path):
    """Yield a scratch directory whose files are moved into ``output_dir`` on success only."""
    output_dir.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=".staging-", dir=output_dir))
    try:
        yield scratch
        for f in sorted(scratch.iterdir()):
            os.replace(f, output_dir / f.name)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)


def run_spec(config: PipelineConfig) -> RunSpec:
    return RunSpec(config.vectorization.kind, config.classifier.algorithm, dict(config.vectorization.params),
                   dict(config.classifier.hyperparameters), config.seed)


def load_docs(config: PipelineConfig, log: RunLog | None = None):
    with stage("ingest"):
        records, diag = load_csv(config.data.path, config.data.text_column, config.data.label_column)
        if not records:
            raise DataError(f"{config.data.path} holds no usable records")
        labels = LabelDictionary.from_records(records)
    with stage("tokenize"):
        tok = TokenizerConfig(config.tokenizer.lowercase, config.tokenizer.fold_diacritics)
        docs, rejected = tokenize_records(records, labels, tok)
    if log:
        log.write("ingest", rows_read=diag.rows_read, skipped=diag.skipped, rejected_empty=len(rejected),
                  n_docs=len(docs), n_classes=labels.n_classes)
    return docs, labels


def run_train(config: PipelineConfig) -> tuple[ModelArchive, EvalReport]:
    """ingest -> tokenize -> split -> fit vectorizer -> train -> evaluate -> write outputs."""
    config.validate()
    out = Path(config.output_dir)
    log = RunLog(out / "run.jsonl")
    log.write("start", command="train", config=config.to_dict(), environment=environment(config))
    docs, labels = load_docs(config, log)
    spec = run_spec(config)
    with stage("split"):
        tr, te = split_indices([d.label for d in docs], config.split.test_fraction, config.seed,
                               config.split.stratified)
        train_docs, test_docs = [docs[i] for i in tr], [docs[i] for i in te]
    with stage("train"):
        vec, model = fit_pipeline(spec, train_docs, labels.n_classes)
    with stage("evaluate"):
        report = evaluate_pipeline(vec, model, test_docs, labels.n_classes)
    archive = ModelArchive(labels, vec, model, config.to_dict())
    with stage("write"), staged_outputs(out) as scratch:
        archive.save(scratch / "model.zip")
        payload = {"spec": spec.to_dict(), "n_train": len(train_docs), "n_test": len(test_docs),
                   "model_warnings": model.warnings, "report": report.to_dict(labels.labels)}
        (scratch / "report.json").write_text(dumps(payload), encoding="utf-8")
        (scratch / "report.txt").write_text(report.to_text(labels.labels), encoding="utf-8")
    log.write("result", accuracy=report.accuracy, macro_f1=report.macro_f1, weighted_f1=report.weighted_f1,
              warnings=model.warnings)
    return archive, report


def _cv_payload(result: CVResult, labels: LabelDictionary) -> dict:
    return {"spec": result.spec.to_dict(), "k": result.k, "summary": result.summary(),
            "warnings": result.warnings, "folds": [r.to_dict(labels.labels) for r in result.reports]}


def run_cv(config: PipelineConfig) -> CVResult:
    config.validate()
    out = Path(config.output_dir)
    log = RunLog(out / "run.jsonl")
    log.write("start", command="cv", config=config.to_dict(), environment=environment(config))
    docs, labels = load_docs(config, log)
    with stage("folds"):
        plan = make_folds([d.label for d in docs], config.cv.k, config.seed, config.cv.stratified)
    with stage("cross-validate"):
        result = cross_validate(run_spec(config), docs, plan, labels.n_classes)
    for rec in result.records(point=0):
        log.write("fold", **rec)
    with stage("write"), staged_outputs(out) as scratch:
        (scratch / "cv.json").write_text(dumps(_cv_payload(result, labels)), encoding="utf-8")
    log.write("result", **result.summary())
    return result


def run_grid(config: PipelineConfig) -> tuple[RunSpec, list[CVResult]]:
    config.validate()
    out = Path(config.output_dir)
    log = RunLog(out / "run.jsonl")
    log.write("start", command="grid", config=config.to_dict(), environment=environment(config))
    grid = config.classifier.grid or DEFAULT_GRIDS.get(config.classifier.algorithm)
    if not grid:
        raise ConfigError(f"classifier.grid: required for {config.classifier.algorithm!r} (no default grid)")
    grid = ParamGrid(grid)
    docs, labels = load_docs(config, log)
    with stage("folds"):
        plan = make_folds([d.label for d in docs], config.cv.k, config.seed, config.cv.stratified)
    with stage("grid-search"):
        best, results = grid_search(run_spec(config), grid, docs, plan, labels.n_classes, config.workers)
    for i, res in enumerate(results):
        for rec in res.records(point=i):
            log.write("fold", **rec)
    payload = {"best": best.to_dict(), "points": [_cv_payload(r, labels) for r in results]}
    with stage("write"), staged_outputs(out) as scratch:
        (scratch / "grid.json").write_text(dumps(payload), encoding="utf-8")
    log.write("result", best=best.to_dict())
    return best, results


def run_predict(archive_path, input_path, output_path, text_column: str | None = None) -> Path:
    """Label every row of a CSV; output keeps row order and adds a ``predicted`` column."""
    with stage("load-archive"):
        archive = ModelArchive.load(archive_path)
    cfg = archive.config
    text_column = text_column or cfg.get("data", {}).get("text_column", "name")
    tok = TokenizerConfig(cfg.get("tokenizer", {}).get("lowercase", True),
                          cfg.get("tokenizer", {}).get("fold_diacritics", False))
    with stage("ingest"):
        with open(input_path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh, strict=True)
            header = next(reader, None)
            if header is None:
                raise DataError(f"{input_path}: missing header row")
            if text_column not in header:
                raise DataError(f"{input_path}: column {text_column!r} not in header {header}")
            col = header.index(text_column)
            texts = []
            for row in reader:
                if not row:
                    continue
                texts.append(row[col] if col < len(row) else "")
    with stage("predict"):
        docs = [TokenizedDoc(tuple(tokenize(t, tok))) for t in texts]
        pred = archive.predict_docs(docs)
    lines = [[text_column, "predicted"]] + [[t, archive.labels.label(int(p))] for t, p in zip(texts, pred)]
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(lines)
    with stage("write"):
        atomic_write_text(Path(output_path), buf.getvalue())
    return Path(output_path)
