"""Record loading, tokenization, word n-grams and deterministic partitions."""

from __future__ import annotations

import csv
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

# Unit separator: tokenize() never emits it, so joined n-grams cannot collide with words.
NGRAM_SEP = "\x1f"

_WORD_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class RawRecord:
    text: str
    label: str


@dataclass(frozen=True)
class TokenizedDoc:
    tokens: tuple[str, ...]
    label: int = -1


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    fold_diacritics: bool = False


@dataclass
class LoadDiagnostics:
    rows_read: int = 0
    skipped: int = 0
    skipped_lines: list[int] = field(default_factory=list)


class LabelDictionary:
    """Bijection between label strings and contiguous class indices (sorted order)."""

    def __init__(self, labels: Sequence[str]):
        labels = list(labels)
        if len(set(labels)) != len(labels):
            raise DataError("duplicate labels in label dictionary")
        if len(labels) < 2:
            raise DataError(f"need at least 2 classes, got {len(labels)}")
        self.labels = labels
        self._index = {lab: i for i, lab in enumerate(labels)}

    @classmethod
    def from_records(cls, records: Sequence[RawRecord]) -> "LabelDictionary":
        return cls(sorted({r.label for r in records}))

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise DataError(f"unknown label {label!r}") from None

    def label(self, index: int) -> str:
        return self.labels[index]

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, LabelDictionary) and self.labels == other.labels


def load_csv(
    path: str | Path, text_column: str = "name", label_column: str = "category"
) -> tuple[list[RawRecord], LoadDiagnostics]:
    """Read labeled records from a UTF-8 CSV with a header row.

    Rows whose text or label is blank are skipped and counted in the returned
    diagnostics. CRLF and LF files give identical records.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"input file not found: {path}")
    diag = LoadDiagnostics()
    records: list[RawRecord] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, strict=True)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: missing header row") from None
        except csv.Error as exc:
            raise DataError(f"{path}, line {reader.line_num}: {exc}") from None
        header = [h.strip().lstrip("﻿") for h in header]
        for col in (text_column, label_column):
            if col not in header:
                raise DataError(f"{path}: missing column {col!r} (have {header})")
        ti, li = header.index(text_column), header.index(label_column)
        while True:
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as exc:
                raise DataError(f"{path}, line {reader.line_num}: malformed row: {exc}") from None
            if not row:
                continue
            diag.rows_read += 1
            text = row[ti].strip() if ti < len(row) else ""
            label = row[li].strip() if li < len(row) else ""
            if not text or not label:
                diag.skipped += 1
                diag.skipped_lines.append(reader.line_num)
                continue
            records.append(RawRecord(text, label))
    if diag.skipped:
        log.info("%s: skipped %d rows with empty text/label", path, diag.skipped)
    return records, diag


def _strip_diacritics(text: str) -> str:
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def tokenize(text: str, config: TokenizerConfig | None = None) -> list[str]:
    """Split on whitespace and any non-alphanumeric character.

    >>> tokenize("lapte-UHT 1,5%")
    ['lapte', 'uht', '1', '5']
    """
    config = config or TokenizerConfig()
    if config.fold_diacritics:
        text = _strip_diacritics(text)
    if config.lowercase:
        text = text.lower()
    return _WORD_RE.findall(text)


def word_ngrams(tokens: Sequence[str], max_n: int) -> list[str]:
    """All contiguous n-grams for n = 1..max_n, shortest first, left to right."""
    if max_n < 1:
        raise ConfigError(f"max_n must be >= 1, got {max_n}")
    tokens = list(tokens)
    out: list[str] = []
    for n in range(1, min(max_n, len(tokens)) + 1):
        for i in range(len(tokens) - n + 1):
            out.append(NGRAM_SEP.join(tokens[i : i + n]))
    return out


def tokenize_records(
    records: Sequence[RawRecord],
    labels: LabelDictionary,
    config: TokenizerConfig | None = None,
) -> tuple[list[TokenizedDoc], list[RawRecord]]:
    """Tokenize records; records that yield no tokens are rejected and returned separately."""
    docs, rejected = [], []
    for rec in records:
        toks = tokenize(rec.text, config)
        if not toks:
            log.warning("rejecting record with no tokens: %r", rec.text)
            rejected.append(rec)
            continue
        docs.append(TokenizedDoc(tuple(toks), labels.index(rec.label)))
    return docs, rejected


def _labels_of(items: Sequence) -> np.ndarray:
    return np.array([it.label for it in items])


def split_indices(
    labels: Sequence, test_fraction: float = 0.2, seed: int = 0, stratified: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Index form of :func:`split`. Both index arrays come back sorted."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    labels = np.asarray(labels)
    n = len(labels)
    if n < 2:
        raise DataError("need at least 2 records to split")
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(n)
        n_test = min(max(int(round(test_fraction * n)), 1), n - 1)
        return np.sort(perm[n_test:]), np.sort(perm[:n_test])
    classes, counts = np.unique(labels, return_counts=True)
    small = [str(c) for c, k in zip(classes, counts) if k < 2]
    if small:
        raise DataError(f"stratified split needs >= 2 records per class; too few in: {small}")
    test = []
    for c in classes:
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(len(idx))]
        n_test = min(max(int(round(test_fraction * len(idx))), 1), len(idx) - 1)
        test.append(idx[:n_test])
    test_idx = np.sort(np.concatenate(test))
    mask = np.ones(n, dtype=bool)
    mask[test_idx] = False
    return np.flatnonzero(mask), test_idx


def split(records: Sequence, test_fraction: float = 0.2, seed: int = 0, stratified: bool = True):
    """Partition labeled items into (train, test) lists, preserving input order within each."""
    tr, te = split_indices(_labels_of(records), test_fraction, seed, stratified)
    return [records[i] for i in tr], [records[i] for i in te]


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: np.ndarray
    seed: int

    def __len__(self) -> int:
        return len(self.assignment)

    def fold_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def folds(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield (train_idx, test_idx) for each fold in order."""
        for f in range(self.k):
            yield np.flatnonzero(self.assignment != f), np.flatnonzero(self.assignment == f)


def make_folds(records: Sequence, k: int = 10, seed: int = 0, stratified: bool = True) -> FoldPlan:
    """Assign each record to one of k folds.

    Stratified plans shuffle each class and deal the classes one after another
    round-robin across folds, so both per-class and overall fold sizes differ
    by at most one.
    """
    labels = _labels_of(records) if len(records) and hasattr(records[0], "label") else np.asarray(records)
    n = len(labels)
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    if k > n:
        raise DataError(f"k={k} exceeds record count {n}")
    rng = np.random.default_rng(seed)
    if stratified:
        order = []
        for c in np.unique(labels):
            idx = np.flatnonzero(labels == c)
            order.append(idx[rng.permutation(len(idx))])
        order = np.concatenate(order)
    else:
        order = rng.permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = np.arange(n) % k
    return FoldPlan(k, assignment, seed)
