"""Shape normalization, classical covariance, robust univariate scales, and the
eigenvalue-reestimated rank covariance matrix."""

from __future__ import annotations

import numpy as np

from .core import (
    DegenerateSampleError,
    NonFiniteError,
    ScatterMatrix,
    ShapeMatrix,
    TooFewObservationsError,
    ZeroTraceError,
    as_matrix,
    as_sample,
)
from .spatial import sample_rcm

__all__ = ["to_shape", "sample_covariance", "mad", "qn", "mrcm", "SCALE_ESTIMATORS"]

MAD_NORMAL_FACTOR = 1.4826
QN_NORMAL_FACTOR = 2.2219

# Above this many pairs the k-th order statistic is found by bisection
# counting instead of materializing all pairwise distances.
_QN_MATERIALIZE_LIMIT = 2 * 10**7


def to_shape(m) -> ShapeMatrix:
    """Trace normalization d * m / trace(m)."""
    kind = m.kind if isinstance(m, ScatterMatrix) else "cov"
    arr = as_matrix(m)
    tr = float(np.trace(arr))
    if tr <= 0:
        raise ZeroTraceError("cannot shape-normalize a matrix with nonpositive trace")
    d = arr.shape[0]
    return ShapeMatrix(arr * (d / tr), kind=kind)


def sample_covariance(sample) -> ScatterMatrix:
    """Classical unbiased covariance (divisor n-1)."""
    smp = as_sample(sample)
    if smp.n < 2:
        raise TooFewObservationsError("covariance needs n >= 2")
    m = np.cov(smp.data, rowvar=False, ddof=1).reshape(smp.d, smp.d)
    return ScatterMatrix(0.5 * (m + m.T), kind="cov", consistency="raw")


def _univariate(xs) -> np.ndarray:
    arr = np.asarray(xs, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("non-finite values in sample")
    if arr.size < 2:
        raise TooFewObservationsError("scale estimate needs n >= 2")
    return arr


def mad(xs) -> float:
    """Median absolute deviation about the median, scaled by 1.4826 for
    consistency with the normal standard deviation."""
    arr = _univariate(xs)
    return MAD_NORMAL_FACTOR * float(np.median(np.abs(arr - np.median(arr))))


def _kth_pair_distance(arr: np.ndarray, k: int) -> float:
    """k-th smallest |x_i - x_j| over i<j (1-indexed), by value bisection."""
    srt = np.sort(arr)
    n = srt.size

    def count_le(t: float) -> int:
        # pairs (i<j in sorted order) with x_j - x_i <= t
        left = np.searchsorted(srt, srt - t, side="left")
        return int((np.arange(n) - left).sum())

    lo, hi = 0.0, float(srt[-1] - srt[0])
    if count_le(lo) >= k:
        return 0.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if count_le(mid) >= k:
            hi = mid
        else:
            lo = mid
    return hi


def qn(xs) -> float:
    """Pairwise-distance order statistic scale: 2.2219 times the k-th smallest
    |x_i - x_j| with k = C(h, 2), h = floor(n/2) + 1."""
    arr = _univariate(xs)
    n = arr.size
    h = n // 2 + 1
    k = h * (h - 1) // 2
    npairs = n * (n - 1) // 2
    if npairs <= _QN_MATERIALIZE_LIMIT:
        ii, jj = np.triu_indices(n, 1)
        dist = np.abs(arr[ii] - arr[jj])
        kth = float(np.partition(dist, k - 1)[k - 1])
    else:
        kth = _kth_pair_distance(arr, k)
    return QN_NORMAL_FACTOR * kth


SCALE_ESTIMATORS = {"mad": mad, "qn": qn}


def mrcm(sample, scale: str = "mad") -> ScatterMatrix:
    """Affine equivariant modification of the rank covariance matrix.

    Eigenvectors come from the sample rank covariance; each eigenvalue is
    re-estimated as the squared robust scale of the data projected on the
    corresponding eigenvector.
    """
    if scale not in SCALE_ESTIMATORS:
        raise ValueError(f"scale must be one of {sorted(SCALE_ESTIMATORS)}")
    smp = as_sample(sample)
    if smp.n < smp.d + 1:
        raise TooFewObservationsError(f"need n >= d+1 = {smp.d + 1}, got {smp.n}")
    scale_fn = SCALE_ESTIMATORS[scale]
    rank_cov = sample_rcm(smp).m
    eigvals, eigvecs = np.linalg.eigh(rank_cov)
    order = np.argsort(eigvals)[::-1]
    eigvecs = eigvecs[:, order]
    scales = np.array([scale_fn(smp.data @ eigvecs[:, i]) for i in range(smp.d)])
    if np.any(scales <= 0):
        raise DegenerateSampleError("zero robust scale along an eigenvector direction")
    m = (eigvecs * scales**2) @ eigvecs.T
    return ScatterMatrix(0.5 * (m + m.T), kind="mrcm", consistency="raw")
