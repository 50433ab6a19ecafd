"""Compiled CART kernels shared by the random-forest and extra-trees learners.

Trees are grown iteratively on a row-index buffer that is partitioned in
place. Samples go to the left child iff ``x < threshold``. Bootstrap
duplicates are carried as integer row weights. Randomness comes from an
explicit xorshift64* state so that a tree is a pure function of its seed,
whatever thread builds it.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _next_u64(state):
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    state[0] = x
    return x * np.uint64(0x2545F4914F6CDD1D)


@njit(cache=True, nogil=True)
def _uniform(state):
    # [0, 1) with 53 random bits
    return float(_next_u64(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, nogil=True)
def _randint(state, n):
    return np.int64(_next_u64(state) % np.uint64(n))


@njit(cache=True, nogil=True)
def _gini(counts, n):
    if n <= 0:
        return 0.0
    s = 0.0
    for c in range(counts.shape[0]):
        p = counts[c] / n
        s += p * p
    return 1.0 - s


@njit(cache=True, nogil=True)
def _best_sorted_split(xs, ys, ws, m, counts, n_total, n_classes, min_leaf, cl, cr):
    """Best threshold over values already sorted ascending.

    Returns ``(score, threshold, n_valid)``; score is the sum over children
    of squared class weights divided by child weight (larger = purer).
    """
    cl[:] = 0.0
    sq_left = 0.0
    sq_right = 0.0
    for c in range(n_classes):
        cr[c] = counts[c]
        sq_right += counts[c] * counts[c]
    n_left = 0.0
    best = -1.0
    best_thr = 0.0
    n_valid = 0
    for i in range(m - 1):
        c = ys[i]
        w = ws[i]
        sq_left += w * (2.0 * cl[c] + w)
        sq_right -= w * (2.0 * cr[c] - w)
        cl[c] += w
        cr[c] -= w
        n_left += w
        a = xs[i]
        b = xs[i + 1]
        if b <= a:
            continue
        n_right = n_total - n_left
        if n_left < min_leaf:
            continue
        if n_right < min_leaf:
            break
        score = sq_left / n_left + sq_right / n_right
        n_valid += 1
        if score > best:
            best = score
            thr = a + (b - a) * 0.5
            if thr <= a:
                thr = b
            best_thr = thr
    return best, best_thr, n_valid


@njit(cache=True, nogil=True)
def build_tree(XT, sorted_idx, y, weight, n_classes, mtry, max_depth, min_samples_leaf,
               random_split, seed):
    """Grow one classification tree.

    Parameters
    ----------
    XT : (p, N) float64, features as rows
    sorted_idx : (p, N) int64, per-feature ascending row order; may be
        empty when ``random_split`` is set
    y : (N,) int64 class indices in ``[0, n_classes)``
    weight : (N,) float64 row multiplicities; rows with 0 are left out
    mtry : number of non-constant candidate features per node
    max_depth : negative for unlimited
    random_split : False for best-threshold CART, True for the Extra-Trees rule
    seed : uint64 RNG seed

    Returns
    -------
    feature, threshold, left, right, value, n_samples, impurity arrays trimmed
    to the number of nodes. ``feature == -1`` marks a leaf; ``value`` holds
    weighted training class counts per node.
    """
    p = XT.shape[0]
    N = XT.shape[1]
    n_rows = 0
    for r in range(N):
        if weight[r] > 0:
            n_rows += 1
    cap = 2 * n_rows + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros((cap, n_classes), np.float64)
    n_samples = np.zeros(cap, np.float64)
    impurity = np.zeros(cap, np.float64)

    state = np.empty(1, np.uint64)
    state[0] = seed if seed != 0 else np.uint64(0x9E3779B97F4A7C15)

    idx = np.empty(n_rows, np.int64)
    node_of = np.full(N, -1, np.int64)
    k = 0
    for r in range(N):
        if weight[r] > 0:
            idx[k] = r
            node_of[r] = 0
            k += 1
    feats = np.arange(p)
    xs = np.empty(n_rows, np.float64)
    ys = np.empty(n_rows, np.int64)
    ws = np.empty(n_rows, np.float64)
    sx = np.empty(n_rows, np.float64)
    sy = np.empty(n_rows, np.int64)
    sw = np.empty(n_rows, np.float64)
    cl = np.empty(n_classes, np.float64)
    cr = np.empty(n_classes, np.float64)

    # stack of (start, end, depth, node)
    stack = np.empty((cap, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = n_rows
    stack[0, 2] = 0
    stack[0, 3] = 0
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        start = stack[top, 0]
        end = stack[top, 1]
        depth = stack[top, 2]
        node = stack[top, 3]
        m = end - start

        counts = value[node]
        wn = 0.0
        for i in range(start, end):
            counts[y[idx[i]]] += weight[idx[i]]
            wn += weight[idx[i]]
        n_samples[node] = wn
        imp = _gini(counts, wn)
        impurity[node] = imp

        if imp <= 0.0 or wn < 2 * min_samples_leaf or (max_depth >= 0 and depth >= max_depth):
            continue

        # scanning the global order beats re-sorting once the node is large
        use_global = (not random_split) and m * np.log2(m + 1.0) * 2.0 > N

        best_score = -1.0
        best_f = -1
        best_thr = 0.0
        n_seen = 0
        n_valid = 0
        for kk in range(p):
            if n_seen >= mtry and n_valid > 0:
                break
            j = kk + _randint(state, p - kk)
            tmp = feats[kk]
            feats[kk] = feats[j]
            feats[j] = tmp
            f = feats[kk]
            col = XT[f]

            if use_global:
                order = sorted_idx[f]
                q = 0
                for t in range(N):
                    r = order[t]
                    if node_of[r] == node:
                        sx[q] = col[r]
                        sy[q] = y[r]
                        sw[q] = weight[r]
                        q += 1
                lo = sx[0]
                hi = sx[m - 1]
            else:
                lo = np.inf
                hi = -np.inf
                for i in range(m):
                    r = idx[start + i]
                    v = col[r]
                    xs[i] = v
                    ys[i] = y[r]
                    ws[i] = weight[r]
                    if v < lo:
                        lo = v
                    if v > hi:
                        hi = v
            if hi <= lo:
                continue
            n_seen += 1

            if random_split:
                thr = lo + (hi - lo) * (1.0 - _uniform(state))
                if thr <= lo:
                    thr = hi
                cl[:] = 0.0
                n_left = 0.0
                for i in range(m):
                    if xs[i] < thr:
                        cl[ys[i]] += ws[i]
                        n_left += ws[i]
                n_right = wn - n_left
                if n_left < min_samples_leaf or n_right < min_samples_leaf:
                    continue
                score = 0.0
                for c in range(n_classes):
                    cr[c] = counts[c] - cl[c]
                    score += cl[c] * cl[c] / n_left + cr[c] * cr[c] / n_right
                n_valid += 1
                if score > best_score:
                    best_score = score
                    best_f = f
                    best_thr = thr
            else:
                if not use_global:
                    order_local = np.argsort(xs[:m], kind="mergesort")
                    for i in range(m):
                        o = order_local[i]
                        sx[i] = xs[o]
                        sy[i] = ys[o]
                        sw[i] = ws[o]
                score, thr, nv = _best_sorted_split(sx, sy, sw, m, counts, wn, n_classes,
                                                    min_samples_leaf, cl, cr)
                n_valid += nv
                if nv > 0 and score > best_score:
                    best_score = score
                    best_f = f
                    best_thr = thr

        if best_f < 0:
            continue

        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        # partition idx[start:end] so that rows with x < thr come first
        col = XT[best_f]
        i = start
        j = end - 1
        while i <= j:
            if col[idx[i]] < best_thr:
                node_of[idx[i]] = lnode
                i += 1
            else:
                node_of[idx[i]] = rnode
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        mid = i

        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lnode
        right[node] = rnode

        stack[top, 0] = mid
        stack[top, 1] = end
        stack[top, 2] = depth + 1
        stack[top, 3] = rnode
        top += 1
        stack[top, 0] = start
        stack[top, 1] = mid
        stack[top, 2] = depth + 1
        stack[top, 3] = lnode
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(),
            value[:n_nodes].copy(), n_samples[:n_nodes].copy(),
            impurity[:n_nodes].copy())


@njit(cache=True, nogil=True)
def apply_tree(X, feature, threshold, left, right):
    """Leaf index reached by every row of ``X``."""
    n = X.shape[0]
    out = np.empty(n, np.int64)
    for r in range(n):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = node
    return out
