"""Spatial signs, spatial ranks, and the pairwise covariance matrices built on them.

All pairwise statistics here are U-statistics over unordered observation
pairs. Coincident observations get the zero sign vector, contribute zero to
every sum, and never shrink the pair count.
"""

from __future__ import annotations

import numpy as np

from ._kernels import pairwise_sign_sums, weighted_pair_scatter
from .core import (
    NonFiniteError,
    Sample,
    ScatterMatrix,
    TooFewObservationsError,
    as_sample,
)

__all__ = [
    "spatial_sign",
    "spatial_rank",
    "rank_matrix",
    "gini_mean_difference",
    "sample_gcm",
    "sample_sscm",
    "sample_rcm",
    "multivariate_gmd",
]


def spatial_sign(v) -> np.ndarray:
    """Unit vector v/||v||, with the zero vector mapped to itself."""
    arr = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("spatial sign of a non-finite vector")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        return np.zeros_like(arr)
    return arr / norm


def spatial_rank(x, sample, leave_one_out: bool = False) -> np.ndarray:
    """Average direction from the sample points to x, a vector in the unit ball.

    With leave_one_out set and x coinciding with a sample row, that row is
    excluded and the average runs over the remaining n-1 points.
    """
    smp = as_sample(sample)
    x = np.asarray(x, dtype=np.float64).reshape(smp.d)
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("spatial rank of a non-finite point")
    diff = x[None, :] - smp.data
    norms = np.linalg.norm(diff, axis=1)
    hit = norms == 0.0
    divisor = smp.n
    if leave_one_out and bool(hit.any()):
        divisor = smp.n - 1
        if divisor < 1:
            raise TooFewObservationsError("leave-one-out rank needs n >= 2")
    signs = np.zeros_like(diff)
    np.divide(diff, norms[:, None], out=signs, where=~hit[:, None])
    return signs.sum(axis=0) / divisor


def rank_matrix(sample) -> np.ndarray:
    """Leave-one-out spatial ranks at every sample row, as an n x d array."""
    smp = as_sample(sample)
    if smp.n < 2:
        raise TooFewObservationsError("sample ranks need n >= 2")
    return pairwise_sign_sums(smp.data) / (smp.n - 1)


def gini_mean_difference(xs) -> float:
    """Mean absolute difference over unordered pairs of a univariate sample.

    Computed through the order-statistic identity
    sum_{i<j} |x_i-x_j| = sum_k (2k-1-n) x_(k), which is exact and O(n log n).
    """
    arr = np.asarray(xs, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("non-finite values in sample")
    n = arr.size
    if n < 2:
        raise TooFewObservationsError("Gini mean difference needs n >= 2")
    srt = np.sort(arr)
    coeff = 2.0 * np.arange(1, n + 1) - 1.0 - n
    total = float(coeff @ srt)
    return total / (n * (n - 1) / 2.0)


def _pair_count(n: int) -> float:
    return n * (n - 1) / 2.0


def sample_gcm(sample) -> ScatterMatrix:
    """Pairwise-difference direction-weighted second moment.

    Average over unordered pairs of (Xi-Xj)(Xi-Xj)^T / ||Xi-Xj||. Its trace
    is exactly the mean pairwise Euclidean distance.
    """
    smp = as_sample(sample)
    if smp.n < 2:
        raise TooFewObservationsError("sample GCM needs n >= 2")
    total, _ = weighted_pair_scatter(smp.data, smp.data, 1)
    return ScatterMatrix(total / _pair_count(smp.n), kind="gcm", consistency="raw")


def sample_sscm(sample) -> ScatterMatrix:
    """Symmetrized spatial sign covariance: average of s(Xi-Xj) s(Xi-Xj)^T."""
    smp = as_sample(sample)
    if smp.n < 2:
        raise TooFewObservationsError("sample SSCM needs n >= 2")
    total, _ = weighted_pair_scatter(smp.data, smp.data, 2)
    return ScatterMatrix(total / _pair_count(smp.n), kind="sscm", consistency="raw")


def sample_rcm(sample) -> ScatterMatrix:
    """Covariance of the leave-one-out spatial ranks, (1/n) sum r_i r_i^T."""
    smp = as_sample(sample)
    if smp.n < 2:
        raise TooFewObservationsError("sample RCM needs n >= 2")
    ranks = rank_matrix(smp)
    m = (ranks.T @ ranks) / smp.n
    return ScatterMatrix(0.5 * (m + m.T), kind="rcm", consistency="raw")


def multivariate_gmd(sample) -> float:
    """Mean pairwise Euclidean distance.

    Evaluated as the trace of the pairwise direction-weighted second moment,
    which the trace identity trace(d dT/||d||) = ||d|| makes exact.
    """
    return float(np.trace(sample_gcm(sample).m))
