"""Confusion matrix, accuracy, and per-class / macro / (1 - frequency)-weighted F1."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise DataError(f"y_true and y_pred must be 1-D of equal length, got {y_true.shape} and {y_pred.shape}")
    if len(y_true) == 0:
        raise DataError("cannot build a confusion matrix from zero samples")
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise DataError(f"{name} holds labels outside 0..{n_classes - 1}")
    return np.bincount(y_true * n_classes + y_pred, minlength=n_classes * n_classes).reshape(n_classes, n_classes)


def _check(cm) -> np.ndarray:
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.sum() <= 0:
        raise DataError("confusion matrix must be square with a positive total")
    return cm


def accuracy(cm) -> float:
    cm = _check(cm)
    return float(np.trace(cm) / cm.sum())


def precision_recall(cm) -> tuple[np.ndarray, np.ndarray]:
    cm = _check(cm).astype(np.float64)
    tp = np.diag(cm)
    col, row = cm.sum(axis=0), cm.sum(axis=1)
    precision = np.divide(tp, col, out=np.zeros_like(tp), where=col > 0)
    recall = np.divide(tp, row, out=np.zeros_like(tp), where=row > 0)
    return precision, recall


def class_weights(cm) -> np.ndarray:
    """w_c = 1 - (share of class c among the evaluated samples)."""
    cm = _check(cm)
    return 1.0 - cm.sum(axis=1) / cm.sum()


def f1_scores(cm) -> tuple[np.ndarray, float, float]:
    """(per-class F1, macro F1, weighted F1). A 0/0 F1 counts as 0."""
    P, R = precision_recall(cm)
    denom = P + R
    f1 = np.divide(2.0 * P * R, denom, out=np.zeros_like(P), where=denom > 0)
    w = class_weights(cm)
    # a single present class gives all-zero weights; fall back to the plain mean
    weighted = float(np.dot(w, f1) / w.sum()) if w.sum() > 0 else float(f1.mean())
    return f1, float(f1.mean()), weighted


@dataclass
class EvalReport:
    confusion: np.ndarray
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    macro_f1: float
    weighted_f1: float
    weights: np.ndarray

    def to_dict(self, labels: list[str] | None = None) -> dict:
        out = {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "confusion": self.confusion.tolist(),
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "f1": self.f1.tolist(),
            "weights": self.weights.tolist(),
        }
        if labels is not None:
            out["labels"] = list(labels)
        return out

    def to_text(self, labels: list[str] | None = None) -> str:
        C = len(self.f1)
        labels = labels or [str(c) for c in range(C)]
        width = max(8, max(len(s) for s in labels))
        lines = [
            f"accuracy     {self.accuracy:.4f}",
            f"macro F1     {self.macro_f1:.4f}",
            f"weighted F1  {self.weighted_f1:.4f}",
            "",
            f"{'class':<{width}}  precision  recall  f1      support",
        ]
        support = self.confusion.sum(axis=1)
        for c in range(C):
            lines.append(f"{labels[c]:<{width}}  {self.precision[c]:9.4f}  {self.recall[c]:6.4f}  "
                         f"{self.f1[c]:6.4f}  {support[c]:7d}")
        lines += ["", "confusion (rows = true, columns = predicted)"]
        lines += [" ".join(f"{v:5d}" for v in row) for row in self.confusion]
        return "\n".join(lines) + "\n"


def evaluate(y_true, y_pred, n_classes: int) -> EvalReport:
    cm = confusion_matrix(y_true, y_pred, n_classes)
    P, R = precision_recall(cm)
    f1, macro, weighted = f1_scores(cm)
    return EvalReport(cm, accuracy(cm), P, R, f1, macro, weighted, class_weights(cm))
