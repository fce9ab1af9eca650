# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Haar wavelet packet energies and gini split search.

Semantics match rotorcm._kernels_py exactly; gini impurities are derived
from exact integer class counts with the identical arithmetic expression,
so both backends make identical split decisions.
"""

import numpy as np

cimport numpy as cnp

from libc.math cimport INFINITY, NAN, sqrt

cnp.import_array()


def haar_wpt_energies(x):
    """Depth-3 Haar wavelet packet node energies (4 level-2 + 8 level-3)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.ascontiguousarray(x, dtype=np.float64).copy()
    cdef Py_ssize_t n = buf.shape[0]
    if n % 8 != 0:
        raise ValueError(f"signal length {n} not divisible by 8")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(12)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nxt = np.empty(n)
    cdef double[::1] cur_v = buf
    cdef double[::1] nxt_v = nxt
    cdef double[::1] out_v = out
    cdef double inv = 1.0 / sqrt(2.0)
    cdef Py_ssize_t level, node, half, i, base, k
    cdef Py_ssize_t n_nodes = 1, node_len = n
    cdef double a, d, e

    for level in range(3):
        half = node_len // 2
        for node in range(n_nodes):
            base = node * node_len
            for i in range(half):
                a = (cur_v[base + 2 * i] + cur_v[base + 2 * i + 1]) * inv
                d = (cur_v[base + 2 * i] - cur_v[base + 2 * i + 1]) * inv
                nxt_v[2 * node * half + i] = a
                nxt_v[(2 * node + 1) * half + i] = d
        cur_v, nxt_v = nxt_v, cur_v
        n_nodes *= 2
        node_len = half
        if level >= 1:
            for node in range(n_nodes):
                e = 0.0
                base = node * node_len
                for i in range(node_len):
                    e += cur_v[base + i] * cur_v[base + i]
                if level == 1:
                    out_v[node] = e
                else:
                    out_v[4 + node] = e
    return out


def best_split_gini(X, y, features, int n_classes):
    """Best (feature, threshold, gini); feature -1 when no valid split.

    Ties resolve to the lowest feature index, then the lowest threshold.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Xa = np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ya = np.ascontiguousarray(y, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] feats = np.sort(np.asarray(features, dtype=np.int64))
    cdef Py_ssize_t n = ya.shape[0]
    cdef long best_f = -1
    cdef double best_thr = NAN
    cdef double best_g = INFINITY
    if n < 2:
        return -1, best_thr, best_g

    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.empty(n_classes, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] totals = np.bincount(ya, minlength=n_classes).astype(np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.empty(n)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ys = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] order
    cdef long[::1] counts_v = counts
    cdef long[::1] totals_v = totals
    cdef double[::1] xs_v = xs
    cdef long[::1] ys_v = ys
    cdef double nf = <double> n
    cdef Py_ssize_t fi, i, c
    cdef long f, cls, cl, cr
    cdef long long sl, sr, sr0
    cdef double g, thr

    sr0 = 0
    for c in range(n_classes):
        sr0 += <long long> totals_v[c] * totals_v[c]

    for fi in range(feats.shape[0]):
        f = feats[fi]
        order = np.argsort(Xa[:, f], kind="stable")
        for i in range(n):
            xs_v[i] = Xa[order[i], f]
            ys_v[i] = ya[order[i]]
        if xs_v[0] == xs_v[n - 1]:
            continue
        for c in range(n_classes):
            counts_v[c] = 0
        sl = 0
        sr = sr0
        for i in range(1, n):
            cls = ys_v[i - 1]
            cl = counts_v[cls]
            cr = totals_v[cls] - cl
            sl += 2 * cl + 1
            sr -= 2 * cr - 1
            counts_v[cls] = cl + 1
            if xs_v[i] == xs_v[i - 1]:
                continue
            g = (nf - (<double> sl) / (<double> i) - (<double> sr) / (<double> (n - i))) / nf
            if g < best_g:
                best_g = g
                best_f = f
                best_thr = (xs_v[i - 1] + xs_v[i]) * 0.5
    return int(best_f), best_thr, best_g
