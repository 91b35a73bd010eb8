"""Compiled inner loops of the level-wise tree grower.

Columns are stored value-sorted with zeros implicit. Scanning a column once
visits every (node, value) pair of the level in increasing value order, with
each node's zero bin slotted in between the negative and positive entries.
"""

import numpy as np
from numba import njit

GINI, ENTROPY, GAIN_RATIO, NEWTON = 0, 1, 2, 3
MIN_GAIN = 1e-12
LN2 = np.log(2.0)


@njit(cache=True, error_model="numpy", inline="always")
def _xlogx(x):
    return x * np.log(x) if x > 0.0 else 0.0


@njit(cache=True, error_model="numpy", inline="always")
def _weighted_impurity(S, j, W, crit):
    """W times the impurity of the node whose summed statistics are row j of S."""
    if W <= 0.0:
        return 0.0
    K = S.shape[1]
    if crit == GINI:
        q = 0.0
        for k in range(K):
            q += S[j, k] * S[j, k]
        return W - q / W
    acc = 0.0
    for k in range(K):
        acc += _xlogx(S[j, k])
    return (W * np.log(W) - acc) / LN2


@njit(cache=True, error_model="numpy", inline="always")
def _gain(LS, LW, PS, PW, j, parent_wimp, crit, lam, min_leaf, mcw, tmp):
    """Gain of moving LS[j] (weight LW) left out of the parent PS[j] (weight PW).

    Returns (gain, info_gain); -inf when a size constraint fails. ``tmp`` is a
    (1, K) scratch row for the right child.
    """
    RW = PW - LW
    if LW < min_leaf or RW < min_leaf:
        return -np.inf, -np.inf
    K = LS.shape[1]
    if crit == NEWTON:
        GL, HL = LS[j, 0], LS[j, 1]
        G, H = PS[j, 0], PS[j, 1]
        GR, HR = G - GL, H - HL
        if HL < mcw or HR < mcw:
            return -np.inf, -np.inf
        g = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - G * G / (H + lam))
        return g, g
    for k in range(K):
        tmp[0, k] = PS[j, k] - LS[j, k]
    g = (parent_wimp - _weighted_impurity(LS, j, LW, crit) - _weighted_impurity(tmp, 0, RW, crit)) / PW
    if crit == GAIN_RATIO:
        pl, pr = LW / PW, RW / PW
        split_info = -(_xlogx(pl) + _xlogx(pr)) / LN2
        return g / split_info, g
    return g, g


@njit(cache=True, error_model="numpy")
def level_scan(col_ptr, col_row, col_val, col_nneg, loc, stats, weight, S_node, W_node,
               feat_ok, use_ok, crit, lam, min_leaf, mcw, avg_gain, use_avg,
               best_gain, best_feat, best_thr, gain_sum, gain_cnt):
    """Best split of every node at this level.

    With ``use_avg`` (gain ratio), only candidates whose information gain is
    positive and at least the node's ``avg_gain`` compete. ``gain_sum`` and
    ``gain_cnt`` accumulate positive information gains per node (gain ratio
    only), which is how the first gain-ratio pass obtains the averages.
    """
    p = col_ptr.shape[0] - 1
    m, K = S_node.shape
    track = crit == GAIN_RATIO
    stamp = np.full(m, -1, np.int64)
    nzS = np.zeros((m, K))
    nzW = np.zeros(m)
    LS = np.zeros((m, K))
    LW = np.zeros(m)
    last = np.zeros(m)
    seen = np.zeros(m, np.bool_)
    touched = np.empty(m, np.int64)
    tmp = np.zeros((1, K))
    parent_wimp = np.zeros(m)
    if crit != NEWTON:
        for j in range(m):
            parent_wimp[j] = _weighted_impurity(S_node, j, W_node[j], crit)

    for f in range(p):
        a, b = col_ptr[f], col_ptr[f + 1]
        if a == b:
            continue
        nt = 0
        for e in range(a, b):
            r = col_row[e]
            j = loc[r]
            if j < 0:
                continue
            if use_ok and not feat_ok[j, f]:
                continue
            if stamp[j] != f:
                stamp[j] = f
                touched[nt] = j
                nt += 1
                nzW[j] = 0.0
                LW[j] = 0.0
                seen[j] = False
                for k in range(K):
                    nzS[j, k] = 0.0
                    LS[j, k] = 0.0
            nzW[j] += weight[r]
            for k in range(K):
                nzS[j, k] += stats[r, k]
        if nt == 0:
            continue
        zero_at = a + col_nneg[f]
        for e in range(a, b + 1):
            if e == zero_at:
                # every touched node's zero bin sits here
                for t in range(nt):
                    j = touched[t]
                    zw = W_node[j] - nzW[j]
                    if zw <= 1e-9:
                        continue
                    if seen[j] and last[j] != 0.0:
                        g, info = _gain(LS, LW[j], S_node, W_node[j], j, parent_wimp[j], crit, lam,
                                        min_leaf, mcw, tmp)
                        if track and info > MIN_GAIN:
                            gain_sum[j] += info
                            gain_cnt[j] += 1.0
                        if g > best_gain[j] and (not use_avg or (info > MIN_GAIN and info >= avg_gain[j] - 1e-12)):
                            best_gain[j] = g
                            best_feat[j] = f
                            best_thr[j] = _midpoint(last[j], 0.0)
                    for k in range(K):
                        LS[j, k] += S_node[j, k] - nzS[j, k]
                    LW[j] += zw
                    last[j] = 0.0
                    seen[j] = True
            if e == b:
                break
            r = col_row[e]
            j = loc[r]
            if j < 0 or stamp[j] != f:
                continue
            if use_ok and not feat_ok[j, f]:
                continue
            v = col_val[e]
            if seen[j] and v != last[j]:
                g, info = _gain(LS, LW[j], S_node, W_node[j], j, parent_wimp[j], crit, lam,
                                min_leaf, mcw, tmp)
                if track and info > MIN_GAIN:
                    gain_sum[j] += info
                    gain_cnt[j] += 1.0
                if g > best_gain[j] and (not use_avg or (info > MIN_GAIN and info >= avg_gain[j] - 1e-12)):
                    best_gain[j] = g
                    best_feat[j] = f
                    best_thr[j] = _midpoint(last[j], v)
            LW[j] += weight[r]
            for k in range(K):
                LS[j, k] += stats[r, k]
            last[j] = v
            seen[j] = True


@njit(cache=True, error_model="numpy", inline="always")
def _midpoint(lo, hi):
    thr = 0.5 * (lo + hi)
    return lo if thr >= hi else thr


@njit(cache=True, error_model="numpy")
def nonconstant_pairs(col_ptr, col_row, col_val, loc, weight, W_node, m):
    """(node, feature) pairs whose feature takes at least two values in the node."""
    p = col_ptr.shape[0] - 1
    stamp = np.full(m, -1, np.int64)
    first = np.zeros(m)
    distinct = np.zeros(m, np.bool_)
    nzW = np.zeros(m)
    touched = np.empty(m, np.int64)
    out_node = []
    out_feat = []
    for f in range(p):
        nt = 0
        for e in range(col_ptr[f], col_ptr[f + 1]):
            r = col_row[e]
            j = loc[r]
            if j < 0:
                continue
            if stamp[j] != f:
                stamp[j] = f
                touched[nt] = j
                nt += 1
                first[j] = col_val[e]
                distinct[j] = False
                nzW[j] = 0.0
            elif col_val[e] != first[j]:
                distinct[j] = True
            nzW[j] += weight[r]
        for t in range(nt):
            j = touched[t]
            if distinct[j] or W_node[j] - nzW[j] > 1e-9:
                out_node.append(j)
                out_feat.append(f)
    return np.array(out_node, np.int64), np.array(out_feat, np.int64)


@njit(cache=True, error_model="numpy")
def route_values(col_ptr, col_row, col_val, loc, split_feat, n):
    """Value of each row at its node's split feature (0 when not stored)."""
    x = np.zeros(n)
    p = col_ptr.shape[0] - 1
    used = np.zeros(p, np.bool_)
    for j in range(split_feat.shape[0]):
        if split_feat[j] >= 0:
            used[split_feat[j]] = True
    for f in range(p):
        if not used[f]:
            continue
        for e in range(col_ptr[f], col_ptr[f + 1]):
            r = col_row[e]
            j = loc[r]
            if j >= 0 and split_feat[j] == f:
                x[r] = col_val[e]
    return x
