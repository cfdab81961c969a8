"""Compiled CART kernels: array-based tree growth and traversal.

A tree is stored as parallel node arrays. ``left[k] == -1`` marks a leaf. Splits
send ``x[feature] <= threshold`` to the left child, with the threshold set to the
largest left-hand training value so a split partitions the same samples under
any increasing transform of the feature.
"""

from __future__ import annotations

import numpy as np
from numba import njit

LEAF = -1


@njit(cache=True)
def _node_score(y, idx, start, end, n_classes, counts):
    # proxy gain: sum_k c_k^2 / n for gini, s^2 / n for variance; higher is purer
    m = end - start
    if n_classes > 0:
        counts[:] = 0.0
        for t in range(start, end):
            counts[int(y[idx[t]])] += 1.0
        acc = 0.0
        for c in range(n_classes):
            acc += counts[c] * counts[c]
        return acc / m
    s = 0.0
    for t in range(start, end):
        s += y[idx[t]]
    return s * s / m


@njit(cache=True)
def _is_pure(y, idx, start, end):
    first = y[idx[start]]
    for t in range(start + 1, end):
        if y[idx[t]] != first:
            return False
    return True


@njit(cache=True)
def grow_tree(X, y, sample, n_classes, max_depth, min_leaf, mtry, seed):
    """Grow one tree on ``X[sample]``.

    ``n_classes > 0`` selects Gini splitting on integer class codes stored in ``y``;
    ``n_classes == 0`` selects variance splitting. Returns node arrays
    ``(feature, threshold, left, right, value, n_nodes)`` where ``value`` holds
    class counts (classification) or the leaf mean in column 0 (regression).
    """
    np.random.seed(seed)
    n = sample.shape[0]
    p = X.shape[1]
    width = max(n_classes, 1)
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, LEAF, dtype=np.int64)
    right = np.full(cap, LEAF, dtype=np.int64)
    value = np.zeros((cap, width))

    idx = sample.copy()
    counts = np.zeros(width)
    lcounts = np.zeros(width)
    feats = np.arange(p)
    xs = np.empty(n)
    ys = np.empty(n)

    # stack of (node, start, end, depth)
    stack = np.empty((cap, 4), dtype=np.int64)
    top = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        m = end - start

        parent = _node_score(y, idx, start, end, n_classes, counts)
        if n_classes > 0:
            for c in range(n_classes):
                value[node, c] = counts[c]
        else:
            s = 0.0
            for t in range(start, end):
                s += y[idx[t]]
            value[node, 0] = s / m

        if depth >= max_depth or m < 2 * min_leaf or _is_pure(y, idx, start, end):
            continue

        # partial Fisher-Yates draw of mtry candidate features
        for a in range(mtry):
            b = a + np.random.randint(0, p - a)
            tmp = feats[a]
            feats[a] = feats[b]
            feats[b] = tmp

        best_gain = parent + 1e-12 * (abs(parent) + 1.0)
        best_f = -1
        best_thr = 0.0
        for a in range(mtry):
            f = feats[a]
            for t in range(m):
                xs[t] = X[idx[start + t], f]
            order = np.argsort(xs[:m])
            for t in range(m):
                ys[t] = y[idx[start + order[t]]]
            if xs[order[0]] == xs[order[m - 1]]:
                continue
            if n_classes > 0:
                lcounts[:] = 0.0
                ltot = 0.0
                rtot = 0.0
                for c in range(n_classes):
                    rtot += counts[c] * counts[c]
            else:
                lsum = 0.0
                total = 0.0
                for t in range(m):
                    total += ys[t]
            for t in range(m - 1):
                if n_classes > 0:
                    c = int(ys[t])
                    lc = lcounts[c]
                    rc = counts[c] - lc
                    ltot += 2.0 * lc + 1.0
                    rtot -= 2.0 * rc - 1.0
                    lcounts[c] = lc + 1.0
                else:
                    lsum += ys[t]
                nl = t + 1
                nr = m - nl
                if nl < min_leaf or nr < min_leaf:
                    continue
                xl = xs[order[t]]
                if xl == xs[order[t + 1]]:
                    continue
                if n_classes > 0:
                    gain = ltot / nl + rtot / nr
                else:
                    rsum = total - lsum
                    gain = lsum * lsum / nl + rsum * rsum / nr
                if gain > best_gain:
                    best_gain = gain
                    best_f = f
                    best_thr = xl

        if best_f < 0:
            continue

        # partition idx[start:end] in place
        lo = start
        hi = end - 1
        while lo <= hi:
            if X[idx[lo], best_f] <= best_thr:
                lo += 1
            else:
                tmp = idx[lo]
                idx[lo] = idx[hi]
                idx[hi] = tmp
                hi -= 1
        mid = lo

        feature[node] = best_f
        threshold[node] = best_thr
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        stack[top, 0] = rnode
        stack[top, 1] = mid
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = lnode
        stack[top, 1] = start
        stack[top, 2] = mid
        stack[top, 3] = depth + 1
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
        n_nodes,
    )


@njit(cache=True)
def apply_tree(X, feature, threshold, left, right):
    """Leaf index reached by every row of ``X``."""
    out = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        node = 0
        while left[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out
