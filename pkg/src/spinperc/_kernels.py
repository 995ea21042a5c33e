"""Compiled inner loops (numba, nogil so blocks can run on threads)."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def inner_pair_means(theta, z, s):
    """Posterior means of ``s(x)`` for each row of per-edge posterior means.

    ``theta[b, e]`` is ``E[X_e | Y_e]`` for sample ``b``; the posterior over
    gauge-fixed inputs is proportional to ``prod_e (1 + z[x, e] * theta[b, e])``.
    """
    B, m = theta.shape
    X = z.shape[0]
    out = np.empty(B)
    for b in range(B):
        num = 0.0
        den = 0.0
        for x in range(X):
            w = 1.0
            for e in range(m):
                w *= 1.0 + z[x, e] * theta[b, e]
                if w == 0.0:
                    break
            den += w
            num += s[x] * w
        out[b] = num / den
    return out


@njit(cache=True, nogil=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, nogil=True)
def _connected(is_open, ea, eb, n, u, target, parent):
    for v in range(n):
        parent[v] = v
    for e in range(ea.size):
        if is_open[e]:
            ra = _find(parent, ea[e])
            rb = _find(parent, eb[e])
            if ra != rb:
                parent[ra] = rb
    ru = _find(parent, u)
    for v in range(n):
        if target[v] and _find(parent, v) == ru:
            return True
    return False


@njit(cache=True, nogil=True)
def perc_hits(open_mat, ea, eb, n, u, target):
    """Per-row indicator that ``u`` reaches a target vertex through open edges."""
    B = open_mat.shape[0]
    parent = np.empty(n, dtype=np.int64)
    out = np.zeros(B, dtype=np.uint8)
    for b in range(B):
        if _connected(open_mat[b], ea, eb, n, u, target, parent):
            out[b] = 1
    return out


@njit(cache=True, nogil=True)
def perc_exact_range(gamma, ea, eb, n, u, target, start, stop):
    """Sum of pattern probabilities over connecting patterns ``start <= mask < stop``."""
    m = gamma.size
    parent = np.empty(n, dtype=np.int64)
    is_open = np.zeros(m, dtype=np.bool_)
    total = 0.0
    for mask in range(start, stop):
        w = 1.0
        for e in range(m):
            bit = (mask >> e) & 1
            is_open[e] = bit == 1
            w *= gamma[e] if bit else 1.0 - gamma[e]
        if w == 0.0:
            continue
        if _connected(is_open, ea, eb, n, u, target, parent):
            total += w
    return total
