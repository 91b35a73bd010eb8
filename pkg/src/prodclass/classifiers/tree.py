"""Binary decision trees grown level by level over exact value bins.

Every feature's distinct values (zero included) are enumerated once into
bins. Only nonzero entries are stored, and a node's zero bin is recovered as
"node total minus nonzero bins", so the cost of a level is proportional to
the nonzeros under the active nodes rather than to n * p. Candidate
thresholds are midpoints between consecutive values present in a node;
ties in gain go to the lowest feature index, then to the smallest threshold.

The same grower backs classification trees (class-count statistics) and the
second-order regression trees of gradient boosting (gradient/hessian sums).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.special import xlogy

from . import _kernels as _k

from ..errors import ConfigError
from .base import Classifier, as_matrix, to_dense

MIN_GAIN = _k.MIN_GAIN


class BinnedData:
    """Column-major copy of X: each feature's nonzero entries sorted by value."""

    def __init__(self, X):
        X = as_matrix(X)
        n, p = X.shape
        C = sp.csc_matrix(X)
        C.eliminate_zeros()
        C.sort_indices()
        rows = C.indices.astype(np.int64)
        vals = C.data.astype(np.float64)
        cols = np.repeat(np.arange(p), np.diff(C.indptr))
        order = np.lexsort((rows, vals, cols))
        self.col_ptr = C.indptr.astype(np.int64)
        self.col_row = rows[order]
        self.col_val = vals[order]
        self.col_nneg = np.add.reduceat(np.r_[self.col_val < 0, False].astype(np.int64),
                                        np.minimum(self.col_ptr[:-1], len(vals)))
        self.col_nneg[np.diff(self.col_ptr) == 0] = 0
        self.n_rows, self.n_features = n, p


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes, k) leaf statistic
    weight: np.ndarray  # (weighted) training samples reaching the node
    gain: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self) -> np.ndarray:
        return self.left < 0

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by every row of X (dense or CSR)."""
        X = to_dense(X)
        node = np.zeros(X.shape[0], dtype=np.int64)
        idx = np.flatnonzero(self.left[node] >= 0)
        while len(idx):
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            idx = idx[self.left[node[idx]] >= 0]
        return node

    def predict_value(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def depth(self) -> int:
        d = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.left[i] >= 0:
                d[self.left[i]] = d[self.right[i]] = d[i] + 1
        return int(d.max())


_CRIT = {"gini": _k.GINI, "info_gain": _k.ENTROPY, "gain_ratio": _k.GAIN_RATIO, "newton": _k.NEWTON}


def _best_splits(data, loc, m, stats, weight, S_node, W_node, crit, lam, min_leaf, mcw, mtry, rng):
    best_gain = np.full(m, -np.inf)
    best_feat = np.full(m, -1, dtype=np.int64)
    best_thr = np.zeros(m)
    feat_ok = np.zeros((1, 1), dtype=np.bool_)
    if mtry is not None:
        nodes, feats = _k.nonconstant_pairs(data.col_ptr, data.col_row, data.col_val, loc, weight, W_node, m)
        order = np.lexsort((rng.random(len(nodes)), nodes))
        sn = nodes[order]
        rank = np.arange(len(sn)) - np.searchsorted(sn, sn, side="left")
        keep = order[rank < mtry]
        feat_ok = np.zeros((m, data.n_features), dtype=np.bool_)
        feat_ok[nodes[keep], feats[keep]] = True
    gsum, gcnt = np.zeros(m), np.zeros(m)
    args = (data.col_ptr, data.col_row, data.col_val, data.col_nneg, loc, stats, weight, S_node, W_node,
            feat_ok, mtry is not None, crit, lam, float(min_leaf), mcw)
    if crit == _k.GAIN_RATIO:
        _k.level_scan(*args, np.zeros(m), False, best_gain.copy(), best_feat.copy(), best_thr.copy(), gsum, gcnt)
        avg = gsum / np.maximum(gcnt, 1.0)
        _k.level_scan(*args, avg, True, best_gain, best_feat, best_thr, np.zeros(m), np.zeros(m))
    else:
        _k.level_scan(*args, np.zeros(m), False, best_gain, best_feat, best_thr, gsum, gcnt)
    return best_gain, best_feat, best_thr


def grow_tree(
    data: BinnedData,
    stats: np.ndarray,
    weight: np.ndarray,
    criterion: str,
    leaf_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    max_depth: int,
    min_samples_leaf: float = 1,
    mtry: int | None = None,
    rng: np.random.Generator | None = None,
    lam: float = 0.0,
    min_child_weight: float = 0.0,
    min_gain: float = MIN_GAIN,
) -> Tree:
    """Grow one tree level by level.

    ``stats`` holds per-row statistics already multiplied by ``weight``: class
    indicator columns for the impurity criteria, (gradient, hessian) for
    ``"newton"``. ``leaf_fn(S, W)`` turns a node's summed statistics into its
    value. With ``mtry`` set, each node searches a fresh random subset of
    ``mtry`` of the features that are non-constant within it.
    """
    crit = _CRIT[criterion]
    stats = np.ascontiguousarray(stats, dtype=np.float64)
    n, K = stats.shape
    weight = np.asarray(weight, dtype=np.float64)
    loc = np.where(weight > 0, 0, -1).astype(np.int64)
    feature, threshold, left, right, values, weights, gains = [-1], [0.0], [-1], [-1], [None], [0.0], [0.0]
    level_ids = np.array([0])
    depth = 0
    while len(level_ids):
        m = len(level_ids)
        act = loc >= 0
        la = loc[act]
        W_node = np.bincount(la, weights=weight[act], minlength=m)
        S_node = np.column_stack([np.bincount(la, weights=stats[act, k], minlength=m) for k in range(K)])
        vals = leaf_fn(S_node, W_node)
        for j, nid in enumerate(level_ids):
            values[nid] = vals[j]
            weights[nid] = W_node[j]
        if depth >= max_depth:
            break
        g, f, t = _best_splits(data, loc, m, stats, weight, S_node, W_node, crit, float(lam),
                               min_samples_leaf, float(min_child_weight), mtry, rng)
        split = g > min_gain
        if not split.any():
            break
        new_ids = []
        for j in np.flatnonzero(split):
            nid = level_ids[j]
            feature[nid], threshold[nid], gains[nid] = int(f[j]), float(t[j]), float(g[j])
            left[nid], right[nid] = len(feature), len(feature) + 1
            new_ids += [len(feature), len(feature) + 1]
            for lst, v in ((feature, -1), (threshold, 0.0), (left, -1), (right, -1),
                           (values, None), (weights, 0.0), (gains, 0.0)):
                lst += [v, v]
        split_feat = np.where(split, f, -1)
        x = _k.route_values(data.col_ptr, data.col_row, data.col_val, loc, split_feat, n)
        rank = np.cumsum(split) - 1
        moving = act.copy()
        moving[act] = split[la]
        lm = loc[moving]
        new_loc = np.full(n, -1, dtype=np.int64)
        new_loc[moving] = 2 * rank[lm] + (x[moving] > t[lm])
        loc = new_loc
        level_ids = np.array(new_ids)
        depth += 1
    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.vstack(values),
        np.array(weights),
        np.array(gains),
    )


# impurity ------------------------------------------------------------

def gini(counts) -> np.ndarray:
    counts = np.atleast_2d(np.asarray(counts, dtype=np.float64))
    tot = counts.sum(axis=1)
    return 1.0 - np.einsum("ij,ij->i", counts, counts) / np.where(tot > 0, tot * tot, 1.0)


def entropy(counts) -> np.ndarray:
    """Shannon entropy in bits of each row's class distribution."""
    counts = np.atleast_2d(np.asarray(counts, dtype=np.float64))
    tot = counts.sum(axis=1)
    P = counts / np.where(tot > 0, tot, 1.0)[:, None]
    return -xlogy(P, P).sum(axis=1) / np.log(2)


CRITERIA = ("gini", "info_gain", "gain_ratio")


def class_counts_leaf(S, W):
    return S


def fit_class_tree(X, y, n_classes, weight=None, criterion="gini", max_depth=30,
                   min_samples_leaf=1, mtry=None, rng=None, data: BinnedData | None = None) -> Tree:
    data = data or BinnedData(X)
    weight = np.ones(len(y)) if weight is None else np.asarray(weight, dtype=np.float64)
    stats = np.zeros((len(y), n_classes))
    stats[np.arange(len(y)), y] = weight
    return grow_tree(data, stats, weight, criterion, class_counts_leaf, max_depth, min_samples_leaf, mtry, rng)


def pack_trees(trees: list[Tree], prefix: str = "") -> dict[str, np.ndarray]:
    sizes = np.array([t.n_nodes for t in trees], dtype=np.int64)
    out = {f"{prefix}sizes": sizes}
    for name in ("feature", "threshold", "left", "right", "value", "weight", "gain"):
        out[f"{prefix}{name}"] = np.concatenate([getattr(t, name) for t in trees]) if trees else np.zeros(0)
    return out


def unpack_trees(arrays: dict[str, np.ndarray], prefix: str = "") -> list[Tree]:
    sizes = arrays[f"{prefix}sizes"]
    bounds = np.r_[0, np.cumsum(sizes)]
    trees = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        parts = [arrays[f"{prefix}{name}"][a:b] for name in ("feature", "threshold", "left", "right", "value", "weight", "gain")]
        trees.append(Tree(*parts))
    return trees


class DecisionTree(Classifier):
    """CART-style binary tree; ``gain_ratio`` gives a C4.5-like split rule."""

    algorithm = "decision_tree"
    defaults = {"criterion": "gini", "max_depth": 30, "min_samples_leaf": 1}

    def _validate(self):
        if self.hp["criterion"] not in CRITERIA:
            raise ConfigError(f"criterion must be one of {CRITERIA}")
        if self.hp["max_depth"] < 0 or self.hp["min_samples_leaf"] < 1:
            raise ConfigError("max_depth must be >= 0 and min_samples_leaf >= 1")

    def _fit(self, ts):
        self.tree = fit_class_tree(ts.X, ts.y, ts.n_classes, criterion=self.hp["criterion"],
                                   max_depth=self.hp["max_depth"], min_samples_leaf=self.hp["min_samples_leaf"])

    def _scores(self, X):
        return self.tree.predict_value(X)

    def _arrays(self):
        return pack_trees([self.tree])

    def _load_arrays(self, arrays):
        self.tree = unpack_trees(arrays)[0]
