"""Hot numeric loops, each in two flavours.

``*_nb`` functions are numba-compiled loops, ``*_np`` functions are the
pure-numpy fallback. The public names at the bottom of the module are bound
to one or the other according to :mod:`hpcmd._accel`. Both flavours take and
return plain arrays so they can be swapped freely and benchmarked side by side.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

EUCLIDEAN = 0
MANHATTAN = 1

# keeps the numpy distance matrix around 32 MB
_QUERY_CHUNK_CELLS = 4_000_000


# --------------------------------------------------------------------------
# nearest neighbours
# --------------------------------------------------------------------------

@njit
def knn_indices_nb(train, queries, k, metric):
    n, d = train.shape
    q = queries.shape[0]
    out = np.empty((q, k), dtype=np.int64)
    best_d = np.empty(k)
    best_i = np.empty(k, dtype=np.int64)
    for qi in range(q):
        filled = 0
        for i in range(n):
            acc = 0.0
            if metric == 0:
                for j in range(d):
                    diff = train[i, j] - queries[qi, j]
                    acc += diff * diff
                dist = math.sqrt(acc)
            else:
                for j in range(d):
                    acc += abs(train[i, j] - queries[qi, j])
                dist = acc
            if filled < k:
                pos = filled
                filled += 1
            elif dist < best_d[k - 1]:
                pos = k - 1
            else:
                continue
            # strict comparison keeps the earlier training index ahead on ties
            while pos > 0 and dist < best_d[pos - 1]:
                best_d[pos] = best_d[pos - 1]
                best_i[pos] = best_i[pos - 1]
                pos -= 1
            best_d[pos] = dist
            best_i[pos] = i
        for j in range(k):
            out[qi, j] = best_i[j]
    return out


def knn_indices_np(train, queries, k, metric):
    n = train.shape[0]
    q = queries.shape[0]
    out = np.empty((q, k), dtype=np.int64)
    step = max(1, _QUERY_CHUNK_CELLS // max(n, 1))
    for lo in range(0, q, step):
        diff = train[None, :, :] - queries[lo:lo + step, None, :]
        if metric == EUCLIDEAN:
            dist = np.sqrt((diff * diff).sum(axis=2))
        else:
            dist = np.abs(diff).sum(axis=2)
        out[lo:lo + step] = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return out


# --------------------------------------------------------------------------
# multilayer perceptron (tanh hidden and output layer, trailing bias column)
# --------------------------------------------------------------------------

@njit
def mlp_forward_nb(w_hidden, w_out, X):
    n, d = X.shape
    h = w_hidden.shape[0]
    out = np.empty(n)
    hidden = np.empty(h)
    for s in range(n):
        for u in range(h):
            z = w_hidden[u, d]
            for j in range(d):
                z += w_hidden[u, j] * X[s, j]
            hidden[u] = math.tanh(z)
        z = w_out[h]
        for u in range(h):
            z += w_out[u] * hidden[u]
        out[s] = math.tanh(z)
    return out


def mlp_forward_np(w_hidden, w_out, X):
    hidden = np.tanh(X @ w_hidden[:, :-1].T + w_hidden[:, -1])
    return np.tanh(hidden @ w_out[:-1] + w_out[-1])


@njit
def mlp_epoch_nb(w_hidden, w_out, X, target, order, lr):
    """One online pass; updates the weight arrays in place."""
    d = X.shape[1]
    h = w_hidden.shape[0]
    hidden = np.empty(h)
    delta_h = np.empty(h)
    for s in order:
        for u in range(h):
            z = w_hidden[u, d]
            for j in range(d):
                z += w_hidden[u, j] * X[s, j]
            hidden[u] = math.tanh(z)
        z = w_out[h]
        for u in range(h):
            z += w_out[u] * hidden[u]
        y = math.tanh(z)
        delta_o = (y - target[s]) * (1.0 - y * y)
        for u in range(h):
            delta_h[u] = delta_o * w_out[u] * (1.0 - hidden[u] * hidden[u])
        for u in range(h):
            w_out[u] -= lr * delta_o * hidden[u]
        w_out[h] -= lr * delta_o
        for u in range(h):
            for j in range(d):
                w_hidden[u, j] -= lr * delta_h[u] * X[s, j]
            w_hidden[u, d] -= lr * delta_h[u]


def mlp_epoch_np(w_hidden, w_out, X, target, order, lr):
    for s in order:
        x = X[s]
        hidden = np.tanh(w_hidden[:, :-1] @ x + w_hidden[:, -1])
        y = math.tanh(float(w_out[:-1] @ hidden + w_out[-1]))
        delta_o = (y - target[s]) * (1.0 - y * y)
        delta_h = delta_o * w_out[:-1] * (1.0 - hidden * hidden)
        w_out[:-1] -= lr * delta_o * hidden
        w_out[-1] -= lr * delta_o
        w_hidden[:, :-1] -= lr * np.outer(delta_h, x)
        w_hidden[:, -1] -= lr * delta_h


# --------------------------------------------------------------------------
# linear models: one stochastic pass each
# --------------------------------------------------------------------------

@njit
def hinge_epoch_nb(w, b, X, y, order, lr, C):
    """Per-sample subgradient of 0.5*|w|^2/n + C*hinge_i. ``y`` in {-1, +1}."""
    n, d = X.shape
    for s in order:
        z = b
        for j in range(d):
            z += w[j] * X[s, j]
        active = y[s] * z < 1.0
        for j in range(d):
            g = w[j] / n
            if active:
                g -= C * y[s] * X[s, j]
            w[j] -= lr * g
        if active:
            b += lr * C * y[s]
    return b


def hinge_epoch_np(w, b, X, y, order, lr, C):
    n = X.shape[0]
    for s in order:
        x = X[s]
        if y[s] * (float(w @ x) + b) < 1.0:
            w -= lr * (w / n - C * y[s] * x)
            b += lr * C * y[s]
        else:
            w -= lr * (w / n)
    return b


@njit
def logistic_epoch_nb(w, b, X, y, order, lr):
    """Per-sample gradient of binary cross-entropy. ``y`` in {0, 1}."""
    d = X.shape[1]
    for s in order:
        z = b
        for j in range(d):
            z += w[j] * X[s, j]
        if z >= 0:
            p = 1.0 / (1.0 + math.exp(-z))
        else:
            e = math.exp(z)
            p = e / (1.0 + e)
        g = p - y[s]
        for j in range(d):
            w[j] -= lr * g * X[s, j]
        b -= lr * g
    return b


def _sigmoid_scalar(z):
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def logistic_epoch_np(w, b, X, y, order, lr):
    for s in order:
        x = X[s]
        g = _sigmoid_scalar(float(w @ x) + b) - y[s]
        w -= lr * g * x
        b -= lr * g
    return b


# --------------------------------------------------------------------------
# decision tree split search and descent
# --------------------------------------------------------------------------

@njit
def _entropy2(a, b):
    n = a + b
    out = 0.0
    if a > 0:
        p = a / n
        out -= p * math.log2(p)
    if b > 0:
        p = b / n
        out -= p * math.log2(p)
    return out


@njit
def best_split_nb(X, y, min_leaf):
    """Return (feature, threshold, gain_ratio); feature -1 when no split is legal."""
    n, d = X.shape
    total_pos = 0
    for i in range(n):
        total_pos += y[i]
    parent = _entropy2(n - total_pos, total_pos)
    best_f = -1
    best_t = 0.0
    best_r = -1.0
    for f in range(d):
        order = np.argsort(X[:, f], kind="mergesort")
        pos_left = 0
        for i in range(1, n):
            pos_left += y[order[i - 1]]
            lo = X[order[i - 1], f]
            hi = X[order[i], f]
            if not lo < hi:
                continue
            if i < min_leaf or n - i < min_leaf:
                continue
            nl = i
            nr = n - i
            children = (nl * _entropy2(nl - pos_left, pos_left)
                        + nr * _entropy2(nr - (total_pos - pos_left), total_pos - pos_left)) / n
            gain = parent - children
            if gain < 0.0:
                gain = 0.0
            ratio = gain / _entropy2(nl, nr)
            if ratio > best_r:
                best_r = ratio
                best_f = f
                best_t = (lo + hi) / 2.0
    return best_f, best_t, best_r


def _entropy2_np(a, b):
    n = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        pa = a / n
        pb = b / n
        ta = np.where(a > 0, -pa * np.log2(np.where(a > 0, pa, 1.0)), 0.0)
        tb = np.where(b > 0, -pb * np.log2(np.where(b > 0, pb, 1.0)), 0.0)
    return ta + tb


def best_split_np(X, y, min_leaf):
    n, d = X.shape
    total_pos = int(y.sum())
    parent = float(_entropy2_np(np.array([n - total_pos]), np.array([total_pos]))[0])
    best_f, best_t, best_r = -1, 0.0, -1.0
    nl = np.arange(1, n)
    nr = n - nl
    for f in range(d):
        order = np.argsort(X[:, f], kind="stable")
        sv = X[order, f]
        pos_left = np.cumsum(y[order])[:-1]
        ok = (sv[:-1] < sv[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
        if not ok.any():
            continue
        children = (nl * _entropy2_np(nl - pos_left, pos_left)
                    + nr * _entropy2_np(nr - (total_pos - pos_left), total_pos - pos_left)) / n
        gain = np.maximum(parent - children, 0.0)
        ratio = np.where(ok, gain / _entropy2_np(nl, nr), -np.inf)
        i = int(np.argmax(ratio))
        if ratio[i] > best_r:
            best_r = float(ratio[i])
            best_f = f
            best_t = (sv[i] + sv[i + 1]) / 2.0
    return best_f, best_t, best_r


@njit
def tree_leaves_nb(feature, threshold, left, right, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for s in range(n):
        node = 0
        while feature[node] >= 0:
            if X[s, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[s] = node
    return out


def tree_leaves_np(feature, threshold, left, right, X):
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    active = feature[node] >= 0
    while active.any():
        idx = rows[active]
        cur = node[idx]
        go_left = X[idx, feature[cur]] <= threshold[cur]
        node[idx] = np.where(go_left, left[cur], right[cur])
        active = feature[node] >= 0
    return node


def _kernel(name):
    return globals()[name + ("_nb" if USE_NUMBA else "_np")]


knn_indices = _kernel("knn_indices")
mlp_forward = _kernel("mlp_forward")
mlp_epoch = _kernel("mlp_epoch")
hinge_epoch = _kernel("hinge_epoch")
logistic_epoch = _kernel("logistic_epoch")
best_split = _kernel("best_split")
tree_leaves = _kernel("tree_leaves")

PAIRS = {
    "knn_indices": (knn_indices_nb, knn_indices_np),
    "mlp_forward": (mlp_forward_nb, mlp_forward_np),
    "mlp_epoch": (mlp_epoch_nb, mlp_epoch_np),
    "hinge_epoch": (hinge_epoch_nb, hinge_epoch_np),
    "logistic_epoch": (logistic_epoch_nb, logistic_epoch_np),
    "best_split": (best_split_nb, best_split_np),
    "tree_leaves": (tree_leaves_nb, tree_leaves_np),
}
