"""Slow, obviously-correct reference implementations used as test oracles."""

import math

import numpy as np


def naive_ngrams(tokens, max_n):
    out = []
    for n in range(1, max_n + 1):
        for i in range(len(tokens) - n + 1):
            out.append("\x1f".join(tokens[i:i + n]))
    return out


def naive_tfidf(docs, max_n, max_features):
    """Dense TF-IDF matrix and term list, computed straight from the definitions."""
    expanded = [naive_ngrams(list(d), max_n) for d in docs]
    freq = {}
    for terms in expanded:
        for t in terms:
            freq[t] = freq.get(t, 0) + 1
    kept = sorted(freq, key=lambda t: (-freq[t], t))[:max_features]
    terms = sorted(kept)
    N = len(docs)
    M = np.zeros((N, len(terms)))
    for j, t in enumerate(terms):
        df = sum(1 for e in expanded if t in e)
        for i, e in enumerate(expanded):
            if e:
                M[i, j] = (e.count(t) / len(e)) * math.log(N / df)
    return M, terms


def knn_scan(Xtr, ytr, Xq, k, n_classes):
    """All-pairs kNN: order every training point by (distance, index), vote, break ties."""
    out = []
    for q in Xq:
        d = np.sqrt(((Xtr - q) ** 2).sum(axis=1))
        top = np.lexsort((np.arange(len(d)), d))[:k]
        counts = [0] * n_classes
        dist = [0.0] * n_classes
        for i in top:
            counts[ytr[i]] += 1
            dist[ytr[i]] += float(d[i])
        best = min(range(n_classes), key=lambda c: (-counts[c], dist[c], c))
        out.append(best)
    return np.array(out)


def tally_metrics(y_true, y_pred, n_classes):
    """Accuracy, per-class F1, macro F1 and (1 - frequency)-weighted F1 by per-sample counting."""
    n = len(y_true)
    correct = 0
    tp = [0] * n_classes
    fp = [0] * n_classes
    fn = [0] * n_classes
    support = [0] * n_classes
    for t, p in zip(y_true, y_pred):
        support[t] += 1
        if t == p:
            correct += 1
            tp[t] += 1
        else:
            fp[p] += 1
            fn[t] += 1
    f1 = []
    for c in range(n_classes):
        prec = tp[c] / (tp[c] + fp[c]) if tp[c] + fp[c] else 0.0
        rec = tp[c] / (tp[c] + fn[c]) if tp[c] + fn[c] else 0.0
        f1.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    w = [1 - s / n for s in support]
    weighted = sum(a * b for a, b in zip(w, f1)) / sum(w) if sum(w) else 0.0
    return correct / n, f1, sum(f1) / n_classes, weighted


def central_diff(f, x, h=1e-6):
    """Numerical gradient of scalar f at array x (x is restored afterwards)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + h
        fp = f()
        x[i] = old - h
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * h)
    return g


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-8))
