"""Fixed-point scatter M-estimators sharing one iteration engine.

The affine equivariant Gini estimator and its single-observation analogue
(the scatter MLE of the elliptical Laplace-type model), together with the
two reference shape M-estimators: the sign-based one at a known location
and its symmetrized pairwise version. Iterations start at the identity,
stop when the Frobenius norm of successive iterates falls below the
configured tolerance, and never discard a slow run: the last iterate is
returned with converged=False.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.linalg import solve_triangular

from ._kernels import weighted_pair_scatter
from .core import (
    DegenerateSampleError,
    EstimatorConfig,
    NonFiniteError,
    Sample,
    ScatterMatrix,
    ShapeMatrix,
    TooFewObservationsError,
    as_sample,
    frobenius,
)
from .elliptical import EllipticalSpec, c_pairwise, normal_pairwise_constant

__all__ = [
    "FixedPointReport",
    "fixed_point_solve",
    "tr_gini",
    "kotz_m",
    "tyler_m",
    "duembgen",
]


@dataclass(frozen=True)
class FixedPointReport:
    """Outcome of a fixed-point solve.

    final_residual is the Frobenius norm of the last successive difference;
    converged means it fell below the tolerance within max_iter iterations.
    """

    estimate: Union[np.ndarray, ScatterMatrix, ShapeMatrix]
    iterations: int
    final_residual: float
    converged: bool
    residuals: tuple = ()


def fixed_point_solve(
    update_map: Callable[[np.ndarray], np.ndarray],
    init: np.ndarray,
    config: Optional[EstimatorConfig] = None,
) -> FixedPointReport:
    """Iterate M <- update_map(M) until the successive Frobenius difference
    drops below config.tolerance or max_iter is reached.

    The returned estimate is the freshly updated iterate, so for a
    contractive map it satisfies its own fixed-point equation within the
    tolerance.
    """
    cfg = config or EstimatorConfig()
    current = np.asarray(init, dtype=np.float64)
    residuals = []
    for it in range(1, cfg.max_iter + 1):
        try:
            nxt = update_map(current)
        except np.linalg.LinAlgError as exc:
            raise NonFiniteError(f"iterate left the positive definite cone: {exc}") from exc
        nxt = np.asarray(nxt, dtype=np.float64)
        if not np.all(np.isfinite(nxt)):
            raise NonFiniteError("fixed-point iterate became non-finite")
        res = frobenius(nxt - current)
        residuals.append(res)
        current = nxt
        if res < cfg.tolerance:
            return FixedPointReport(current, it, res, True, tuple(residuals))
    return FixedPointReport(current, cfg.max_iter, residuals[-1], False, tuple(residuals))


def _whitened(data: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Rows y with ||y_i - y_j||^2 = (x_i-x_j)' M^{-1} (x_i-x_j)."""
    chol = np.linalg.cholesky(m)
    return solve_triangular(chol, data.T, lower=True).T


def _check_spanning(rows: np.ndarray, d: int, *, what: str):
    if np.linalg.matrix_rank(rows) < d:
        raise DegenerateSampleError(f"{what} concentrate on a hyperplane")


def _resolve_c(convention, d: int) -> tuple[Optional[float], str]:
    if convention == "normal":
        return normal_pairwise_constant(d), "normal"
    if convention is None or convention == "none":
        return None, "raw"
    if isinstance(convention, EllipticalSpec):
        return c_pairwise(convention).value, "known-f"
    if isinstance(convention, (int, float)):
        c = float(convention)
        if not (c > 0):
            raise ValueError("explicit pairwise constant must be positive")
        return c, "known-f"
    raise ValueError(f"unknown c convention {convention!r}")


def tr_gini(
    sample,
    config: Optional[EstimatorConfig] = None,
    warm_start: Optional[np.ndarray] = None,
) -> FixedPointReport:
    """Affine equivariant Gini scatter estimate.

    Solves the transformation-retransformation fixed point: the average over
    unordered pairs of (d/c) * delta delta^T / sqrt(delta' M^{-1} delta)
    must reproduce M. With the default normal constant c the estimate is
    Fisher consistent for the scatter parameter at normal models.
    """
    cfg = config or EstimatorConfig()
    smp = as_sample(sample)
    n, d = smp.n, smp.d
    if n < d + 1:
        raise TooFewObservationsError(f"need n >= d+1 = {d + 1}, got {n}")
    _check_spanning(smp.data - smp.data.mean(axis=0), d, what="pairwise differences")
    c, consistency = _resolve_c(cfg.c_convention, d)
    scale = (d / c) if c is not None else 1.0
    npairs = n * (n - 1) / 2.0
    data = smp.data

    def update(m):
        y = _whitened(data, m)
        total, _ = weighted_pair_scatter(data, y, 1)
        return scale * total / npairs

    report = fixed_point_solve(update, warm_start if warm_start is not None else np.eye(d), cfg)
    est = ScatterMatrix(report.estimate, kind="tr-gini", consistency=consistency)
    return FixedPointReport(est, report.iterations, report.final_residual,
                            report.converged, report.residuals)


def kotz_m(
    sample,
    location,
    config: Optional[EstimatorConfig] = None,
    warm_start: Optional[np.ndarray] = None,
) -> FixedPointReport:
    """Scatter M-estimate with weights w1(t)=t, w2(t)=1 at a known location.

    Fixed point of (1/n) sum (Xi-mu)(Xi-mu)^T / sqrt((Xi-mu)' M^{-1} (Xi-mu));
    observations equal to mu contribute zero terms without reducing n.
    """
    cfg = config or EstimatorConfig()
    smp = as_sample(sample)
    n, d = smp.n, smp.d
    if n < d + 1:
        raise TooFewObservationsError(f"need n >= d+1 = {d + 1}, got {n}")
    mu = np.asarray(location, dtype=np.float64).reshape(d)
    centered = smp.data - mu
    _check_spanning(centered, d, what="centered observations")

    def update(m):
        z = _whitened(centered, m)
        q = np.sqrt((z * z).sum(axis=1))
        w = np.zeros_like(q)
        np.divide(1.0, q, out=w, where=q > 0)
        nxt = (centered * w[:, None]).T @ centered / n
        return 0.5 * (nxt + nxt.T)

    report = fixed_point_solve(update, warm_start if warm_start is not None else np.eye(d), cfg)
    est = ScatterMatrix(report.estimate, kind="kotz-m", consistency="raw")
    return FixedPointReport(est, report.iterations, report.final_residual,
                            report.converged, report.residuals)


def _sign_shape_update(vectors: np.ndarray, d: int, divisor: float):
    def update(m):
        z = _whitened(vectors, m)
        q = (z * z).sum(axis=1)
        w = np.zeros_like(q)
        np.divide(1.0, q, out=w, where=q > 0)
        nxt = d * (vectors * w[:, None]).T @ vectors / divisor
        nxt = 0.5 * (nxt + nxt.T)
        return nxt * (d / np.trace(nxt))

    return update


def tyler_m(
    sample,
    location,
    config: Optional[EstimatorConfig] = None,
) -> FixedPointReport:
    """Sign-based shape M-estimate at a known location, normalized to trace d."""
    cfg = config or EstimatorConfig()
    smp = as_sample(sample)
    n, d = smp.n, smp.d
    if n < d + 1:
        raise TooFewObservationsError(f"need n >= d+1 = {d + 1}, got {n}")
    mu = np.asarray(location, dtype=np.float64).reshape(d)
    centered = smp.data - mu
    _check_spanning(centered, d, what="centered observations")
    report = fixed_point_solve(_sign_shape_update(centered, d, float(n)), np.eye(d), cfg)
    est = ShapeMatrix(_renormalized(report.estimate, d), kind="tyler")
    return FixedPointReport(est, report.iterations, report.final_residual,
                            report.converged, report.residuals)


def duembgen(sample, config: Optional[EstimatorConfig] = None) -> FixedPointReport:
    """Symmetrized sign-based shape M-estimate on all pairwise differences.

    Location-free: translations cancel exactly. Needs n >= d+2 so the
    differences span.
    """
    cfg = config or EstimatorConfig()
    smp = as_sample(sample)
    n, d = smp.n, smp.d
    if n < d + 2:
        raise TooFewObservationsError(f"need n >= d+2 = {d + 2}, got {n}")
    _check_spanning(smp.data - smp.data.mean(axis=0), d, what="pairwise differences")
    npairs = n * (n - 1) / 2.0
    data = smp.data

    def update(m):
        y = _whitened(data, m)
        total, _ = weighted_pair_scatter(data, y, 2)
        nxt = d * total / npairs
        return nxt * (d / np.trace(nxt))

    report = fixed_point_solve(update, np.eye(d), cfg)
    est = ShapeMatrix(_renormalized(report.estimate, d), kind="duembgen")
    return FixedPointReport(est, report.iterations, report.final_residual,
                            report.converged, report.residuals)


def _renormalized(m: np.ndarray, d: int) -> np.ndarray:
    # iterates are already trace-d up to fp rounding; pin it exactly
    return m * (d / np.trace(m))
