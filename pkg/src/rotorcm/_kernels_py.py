"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or explicitly disabled
via ROTORCM_PURE_PYTHON=1.  Both backends compute gini impurities from
exact integer class counts with the same arithmetic expression, so split
decisions (including tie-breaks) are identical.
"""

import math

import numpy as np

_SQRT2 = math.sqrt(2.0)


def haar_wpt_energies(x):
    """Depth-3 Haar wavelet packet node energies.

    Returns 12 values: the 4 level-2 node energies followed by the
    8 level-3 node energies, nodes in natural (Paley) order where child
    2i is the approximation and 2i+1 the detail of node i.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n % 8 != 0:
        raise ValueError(f"signal length {n} not divisible by 8")
    nodes = x[np.newaxis, :]
    out = np.empty(12)
    for level in range(3):
        a = (nodes[:, 0::2] + nodes[:, 1::2]) / _SQRT2
        d = (nodes[:, 0::2] - nodes[:, 1::2]) / _SQRT2
        nodes = np.stack([a, d], axis=1).reshape(2 * nodes.shape[0], -1)
        if level == 1:
            out[:4] = np.sum(nodes * nodes, axis=1)
    out[4:] = np.sum(nodes * nodes, axis=1)
    return out


def best_split_gini(X, y, features, n_classes):
    """Best (feature, threshold) by weighted gini over candidate features.

    Features are scanned in ascending index order and only strictly
    better impurities replace the incumbent, so ties resolve to the
    lowest feature index and then the lowest threshold.  Returns
    (feature, threshold, gini); feature is -1 when no valid split exists.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = y.shape[0]
    best_f, best_thr, best_g = -1, math.nan, math.inf
    if n < 2:
        return best_f, best_thr, best_g
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    for f in np.sort(np.asarray(features, dtype=np.int64)):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        if xs[0] == xs[-1]:
            continue
        onehot[:] = 0
        onehot[np.arange(n), y[order]] = 1
        cum = np.cumsum(onehot, axis=0)
        left = cum[:-1]
        right = cum[-1] - left
        sl = np.sum(left * left, axis=1)
        sr = np.sum(right * right, axis=1)
        i = np.arange(1, n, dtype=np.float64)
        gini = (n - sl / i - sr / (n - i)) / n
        gini[xs[1:] == xs[:-1]] = math.inf
        j = int(np.argmin(gini))
        if gini[j] < best_g:
            best_g = float(gini[j])
            best_f = int(f)
            best_thr = (xs[j] + xs[j + 1]) * 0.5
    return best_f, best_thr, best_g
