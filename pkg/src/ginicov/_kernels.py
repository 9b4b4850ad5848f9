"""Compiled O(n^2) pairwise kernels.

Both kernels accumulate into a fixed number of chunk-local buffers that are
combined in a fixed order, so results are bit-identical for any numba thread
count. Zero-length pairs (exact ties) carry zero weight and are counted
rather than dropped from the pair budget.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

# Fixed chunk count for deterministic parallel reductions.
_NCHUNK = 193


@njit(cache=True, parallel=True, fastmath=True)
def pair_weighted_scatter(X, Y, power):
    """Sum over unordered pairs of w_ij (Xi-Xj)(Xi-Xj)^T.

    w_ij = ||Yi-Yj||^-power with power 1 or 2; w_ij = 0 when Yi == Yj.
    Returns the d x d sum and the number of zero-distance pairs.
    """
    n, d = X.shape
    dy = Y.shape[1]
    partial = np.zeros((_NCHUNK, d, d))
    zeros = np.zeros(_NCHUNK, dtype=np.int64)
    for c in prange(_NCHUNK):
        for i in range(c, n, _NCHUNK):
            for j in range(i + 1, n):
                s = 0.0
                for k in range(dy):
                    t = Y[i, k] - Y[j, k]
                    s += t * t
                if s <= 0.0:
                    zeros[c] += 1
                    continue
                if power == 1:
                    w = 1.0 / np.sqrt(s)
                else:
                    w = 1.0 / s
                for k in range(d):
                    wdk = w * (X[i, k] - X[j, k])
                    for l in range(k, d):
                        partial[c, k, l] += wdk * (X[i, l] - X[j, l])
    out = np.zeros((d, d))
    nzero = 0
    for c in range(_NCHUNK):
        nzero += zeros[c]
        for k in range(d):
            for l in range(k, d):
                out[k, l] += partial[c, k, l]
    for k in range(d):
        for l in range(k):
            out[k, l] = out[l, k]
    return out, nzero


@njit(cache=True, parallel=True, fastmath=True)
def sign_sum_rows(X):
    """Row i of the result is the sum over j != i of (Xi-Xj)/||Xi-Xj||."""
    n, d = X.shape
    out = np.zeros((n, d))
    for i in prange(n):
        for j in range(n):
            s = 0.0
            for k in range(d):
                t = X[i, k] - X[j, k]
                s += t * t
            if s > 0.0:
                w = 1.0 / np.sqrt(s)
                for k in range(d):
                    out[i, k] += w * (X[i, k] - X[j, k])
    return out


def weighted_pair_scatter(X: np.ndarray, Y: np.ndarray, power: int):
    """Python-facing wrapper ensuring contiguous float64 inputs."""
    Xc = np.ascontiguousarray(X, dtype=np.float64)
    Yc = Xc if Y is X else np.ascontiguousarray(Y, dtype=np.float64)
    return pair_weighted_scatter(Xc, Yc, power)


def pairwise_sign_sums(X: np.ndarray) -> np.ndarray:
    return sign_sum_rows(np.ascontiguousarray(X, dtype=np.float64))
