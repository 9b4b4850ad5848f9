"""Influence curves, empirical influence estimation, and asymptotic efficiency.

For an affine equivariant scatter functional at a spherical model the
influence of a contaminating point x factors into two radial functions:
IF(x) = alpha(r) * xx^T/r^2 - beta(r) * I with r = ||x||. This module
evaluates those curves (closed form where available, Monte Carlo for the
pairwise Gini functional), estimates influence numerically by finite
differences of contaminated samples, and turns off-diagonal asymptotic
variances into relative-efficiency tables.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import ScatterMatrix, ShapeMatrix, as_matrix, as_sample
from .elliptical import (
    EllipticalSpec,
    MomentUndefinedError,
    c_first,
    c_pairwise,
    draw,
    mean_squared_radius,
    radial_ppf,
    tau_regular,
)
from .m_estimators import FixedPointReport
from .spatial import sample_gcm

__all__ = [
    "IFCurve",
    "AlphaBeta",
    "AsvEstimate",
    "AreRow",
    "AREReport",
    "if_gcm",
    "alpha_beta_cov",
    "alpha_beta_tyler",
    "alpha_beta_kotz",
    "alpha_beta_trgini",
    "if_curve",
    "empirical_if",
    "asv_offdiag",
    "asv_trgini_components",
    "are_table",
    "write_if_curves_csv",
    "write_are_csv",
    "DUEMBGEN_REFERENCE_ARE",
]

IF_CURVE_KINDS = ("cov", "tyler", "kotz-m", "tr-gini")

# Relative efficiencies of the symmetrized sign-based shape estimator versus
# the regular shape estimator. No closed form exists for its off-diagonal
# asymptotic variance; these externally computed reference values are carried
# as metadata only and are never used as an oracle for our own estimators.
DUEMBGEN_REFERENCE_ARE = {
    (2, "t", 5.0): 2.36, (2, "t", 6.0): 1.57, (2, "t", 8.0): 1.26,
    (2, "t", 15.0): 1.01, (2, "normal", None): 0.91, (2, "kotz", None): 1.22,
    (3, "t", 5.0): 2.38, (3, "t", 6.0): 1.66, (3, "t", 8.0): 1.27,
    (3, "t", 15.0): 1.04, (3, "normal", None): 0.92, (3, "kotz", None): 1.18,
    (4, "t", 5.0): 2.39, (4, "t", 6.0): 1.69, (4, "t", 8.0): 1.30,
    (4, "t", 15.0): 1.06, (4, "normal", None): 0.93, (4, "kotz", None): 1.15,
    (5, "t", 5.0): 2.50, (5, "t", 6.0): 1.71, (5, "t", 8.0): 1.31,
    (5, "t", 15.0): 1.07, (5, "normal", None): 0.94, (5, "kotz", None): 1.13,
}


@dataclass(frozen=True)
class IFCurve:
    """Tabulated alpha/beta influence curves over a radius grid."""

    estimator_kind: str
    grid: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    mc_se: Optional[np.ndarray] = None

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.float64)
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if len(self.alpha) != g.size or len(self.beta) != g.size:
            raise ValueError("alpha/beta must match the grid length")


@dataclass(frozen=True)
class AlphaBeta:
    alpha: float
    beta: float
    se_alpha: float = 0.0
    se_beta: float = 0.0


def _estimate_matrix(result) -> np.ndarray:
    if isinstance(result, FixedPointReport):
        result = result.estimate
    return as_matrix(result)


def _spherical_draws(spec: EllipticalSpec, n: int, seed: int) -> np.ndarray:
    return draw(spec.spherical(), n, seed).data


def if_gcm(x, spec_or_sample, mc_size: int = 10**5, seed: int = 0) -> np.ndarray:
    """Influence of a point on the pairwise Gini covariance:
    2 E[(X-x)(X-x)^T/||X-x||] - 2 Sigma_g.

    With a model spec the expectations are Monte Carlo; with a sample they
    are plug-in averages over the rows.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if isinstance(spec_or_sample, EllipticalSpec):
        spec = spec_or_sample
        rows = draw(spec, mc_size, seed).data
        pair_rows = draw(spec, 2 * mc_size, seed + 1).data
        gcm = _pair_kernel_mean(pair_rows[:mc_size], pair_rows[mc_size:])
    else:
        smp = as_sample(spec_or_sample)
        rows = smp.data
        gcm = sample_gcm(smp).m
    kernel = _point_kernel_mean(rows, x)
    return 2.0 * kernel - 2.0 * gcm


def _point_kernel_mean(rows: np.ndarray, x: np.ndarray) -> np.ndarray:
    diff = rows - x
    norms = np.linalg.norm(diff, axis=1)
    w = np.zeros_like(norms)
    np.divide(1.0, norms, out=w, where=norms > 0)
    m = (diff * w[:, None]).T @ diff / rows.shape[0]
    return 0.5 * (m + m.T)


def _pair_kernel_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a - b
    norms = np.linalg.norm(diff, axis=1)
    w = np.zeros_like(norms)
    np.divide(1.0, norms, out=w, where=norms > 0)
    m = (diff * w[:, None]).T @ diff / a.shape[0]
    return 0.5 * (m + m.T)


def alpha_beta_cov(r: float) -> AlphaBeta:
    """Covariance influence curves: quadratic alpha, constant beta."""
    return AlphaBeta(float(r) ** 2, 1.0)


def alpha_beta_tyler(r: float, d: int) -> AlphaBeta:
    """Sign-based shape M-estimator influence curves: both constant."""
    return AlphaBeta(float(d + 2), (d + 2) / d)


def alpha_beta_kotz(r: float, spec: EllipticalSpec) -> AlphaBeta:
    """First-power radial M-estimator curves: alpha linear through the origin,
    beta affine decreasing."""
    d = spec.d
    c1 = c_first(spec)
    r = float(r)
    alpha = d * (d + 2) * r / ((d + 1) * c1)
    beta = d / c1 * (2.0 - r / (d + 1))
    return AlphaBeta(alpha, beta)


def _trgini_integrand(x1: np.ndarray, s) -> tuple[np.ndarray, np.ndarray]:
    """Per-draw values whose means over X1 drive the pairwise Gini influence:
    ||X1 - s e1|| and the second-coordinate correction term."""
    d = x1.shape[-1]
    first = x1[..., 0] - s
    rest = (x1[..., 1:] ** 2).sum(axis=-1)
    norm = np.sqrt(first**2 + rest)
    coord2 = x1[..., 1] ** 2 if d >= 2 else np.zeros_like(norm)
    ratio = np.zeros_like(norm)
    np.divide(coord2, norm, out=ratio, where=norm > 0)
    return norm, ratio


def alpha_beta_trgini(
    r: float,
    spec: EllipticalSpec,
    mc_size: int = 10**5,
    seed: int = 0,
    c: Optional[float] = None,
) -> AlphaBeta:
    """Monte Carlo influence curves of the affine equivariant Gini functional
    at the spherical model."""
    d = spec.d
    if c is None:
        c = c_pairwise(spec, seed=seed + 7919).value
    x1 = _spherical_draws(spec, mc_size, seed)
    norm, ratio = _trgini_integrand(x1, float(r))
    a_draws = norm - d * ratio
    b_draws = norm + (d + 2) * ratio
    ka = 2.0 * d * (d + 2) / ((d + 1) * c)
    kb = 2.0 * d / ((d + 1) * c)
    alpha = ka * float(a_draws.mean())
    beta = 4.0 - kb * float(b_draws.mean())
    se_a = ka * float(a_draws.std(ddof=1)) / math.sqrt(mc_size)
    se_b = kb * float(b_draws.std(ddof=1)) / math.sqrt(mc_size)
    return AlphaBeta(alpha, beta, se_a, se_b)


def if_curve(
    kind: str,
    spec: EllipticalSpec,
    rmax: float,
    points: int,
    mc_size: int = 10**5,
    seed: int = 0,
) -> IFCurve:
    """Tabulate alpha/beta over an even radius grid for one estimator kind."""
    if kind not in IF_CURVE_KINDS:
        raise ValueError(f"influence curves available for {IF_CURVE_KINDS}, got {kind!r}")
    grid = np.linspace(0.0, float(rmax), points)
    alphas = np.empty(points)
    betas = np.empty(points)
    ses = np.zeros(points)
    c = c_pairwise(spec, seed=seed + 7919).value if kind == "tr-gini" else None
    for i, r in enumerate(grid):
        if kind == "cov":
            ab = alpha_beta_cov(r)
        elif kind == "tyler":
            ab = alpha_beta_tyler(r, spec.d)
        elif kind == "kotz-m":
            ab = alpha_beta_kotz(r, spec)
        else:
            ab = alpha_beta_trgini(r, spec, mc_size=mc_size, seed=seed + i, c=c)
        alphas[i] = ab.alpha
        betas[i] = ab.beta
        ses[i] = max(ab.se_alpha, ab.se_beta)
    return IFCurve(kind, grid, alphas, betas, ses)


def empirical_if(
    estimator: Callable[[np.ndarray], object],
    x,
    spec: EllipticalSpec,
    eps: float = 1e-3,
    n: int = 10**5,
    seed: int = 0,
) -> np.ndarray:
    """Finite-difference influence estimate with common random numbers.

    A clean sample of n rows is drawn once; ceil(eps*n) copies of x are
    appended for the contaminated evaluation, so the point mass actually
    receives weight k/(n+k), which is used as the divisor.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must be in (0, 1)")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    clean_rows = draw(spec, n, seed).data
    k = math.ceil(eps * n)
    contaminated = np.vstack([clean_rows, np.tile(x, (k, 1))])
    t_clean = _estimate_matrix(estimator(clean_rows))
    t_contam = _estimate_matrix(estimator(contaminated))
    eps_actual = k / (n + k)
    return (t_contam - t_clean) / eps_actual


@dataclass(frozen=True)
class AsvEstimate:
    value: float
    method: str
    se: float = 0.0


@dataclass(frozen=True)
class TrGiniAsv:
    """Asymptotic variance components of the affine equivariant Gini shape
    estimator at a spherical model: off-diagonal variance, diagonal variance,
    and the covariance of two diagonal entries (equal to asv_diag - 2*asv_offdiag)."""

    asv_offdiag: float
    se_offdiag: float
    asv_diag: float
    se_diag: float
    cov_diag: float


def _sq_mean_unbiased(values: np.ndarray) -> np.ndarray:
    """Unbiased estimate of (E g)^2 per row from inner draws along axis 1."""
    m = values.mean(axis=1)
    v = values.var(axis=1, ddof=1)
    return m**2 - v / values.shape[1]


def asv_trgini_components(
    spec: EllipticalSpec,
    outer: int = 10**4,
    inner: int = 10**3,
    seed: int = 0,
    c: Optional[float] = None,
) -> TrGiniAsv:
    """Nested Monte Carlo of the squared conditional expectations driving the
    pairwise Gini asymptotic variances.

    Outer radii are drawn by stratified inversion of the radial law (one
    uniform jitter per stratum), inner expectations use fresh draws per outer
    point, and the squared conditional mean is estimated without the O(1/inner)
    noise bias. Reported standard errors use the i.i.d. formula and are
    conservative under stratification.
    """
    d = spec.d
    if c is None:
        c = c_pairwise(spec, seed=seed + 7919).value
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    u = (np.arange(outer) + rng.random(outer)) / outer
    radii = radial_ppf(spec, u)
    sq_a = np.empty(outer)
    sq_n = np.empty(outer)
    chunk = max(1, min(outer, int(2 * 10**5 / max(inner, 1)) or 1))
    spherical = spec.spherical()
    pos = 0
    while pos < outer:
        b = min(chunk, outer - pos)
        x1 = draw(spherical, b * inner, seed + 1 + pos).data.reshape(b, inner, d)
        norm, ratio = _trgini_integrand(x1, radii[pos:pos + b, None])
        sq_a[pos:pos + b] = _sq_mean_unbiased(norm - d * ratio)
        sq_n[pos:pos + b] = _sq_mean_unbiased(norm)
        pos += b
    pref = 4.0 * d * (d + 2) / ((d + 1) ** 2 * c**2)
    asv12 = pref * float(sq_a.mean())
    se12 = pref * float(sq_a.std(ddof=1)) / math.sqrt(outer)
    diag_term = 16.0 * (float(sq_n.mean()) / c**2 - 1.0)
    asv11 = 2.0 * (d - 1) / d * asv12 + diag_term
    se11 = math.sqrt(
        (2.0 * (d - 1) / d * se12) ** 2
        + (16.0 / c**2 * float(sq_n.std(ddof=1)) / math.sqrt(outer)) ** 2
    )
    return TrGiniAsv(asv12, se12, asv11, se11, asv11 - 2.0 * asv12)


def asv_offdiag(
    estimator_kind: str,
    spec: EllipticalSpec,
    outer: int = 10**4,
    inner: int = 10**3,
    seed: int = 0,
) -> AsvEstimate:
    """Off-diagonal asymptotic variance of a shape estimator at the spherical
    model behind spec."""
    d = spec.d
    if estimator_kind == "cov":
        return AsvEstimate(tau_regular(spec), "closed-form")
    if estimator_kind == "tyler":
        return AsvEstimate((d + 2) / d, "closed-form")
    if estimator_kind == "kotz-m":
        value = d * (d + 2) * mean_squared_radius(spec) / ((d + 1) ** 2 * c_first(spec) ** 2)
        return AsvEstimate(value, "closed-form")
    if estimator_kind == "zonoid":
        c1sq = c_first(spec) ** 2
        value = d * (4.0 * mean_squared_radius(spec) - 3.0 * c1sq) / ((d + 2) * c1sq)
        return AsvEstimate(value, "closed-form")
    if estimator_kind == "tr-gini":
        comp = asv_trgini_components(spec, outer=outer, inner=inner, seed=seed)
        return AsvEstimate(comp.asv_offdiag, "monte-carlo", comp.se_offdiag)
    raise ValueError(f"no off-diagonal asymptotic variance for {estimator_kind!r}")


@dataclass(frozen=True)
class AreRow:
    estimator: str
    family: str
    nu: Optional[float]
    d: int
    asv: float
    are: float
    method: str
    se: float


@dataclass(frozen=True)
class AREReport:
    rows: tuple

    def render(self) -> str:
        lines = [f"{'estimator':<10} {'family':<7} {'nu':>5} {'d':>2} {'asv':>9} {'are':>7} {'se':>7}  method"]
        for r in self.rows:
            nu = f"{r.nu:g}" if r.nu is not None else "-"
            asv = f"{r.asv:.4f}" if np.isfinite(r.asv) else "-"
            are = f"{r.are:.4f}" if np.isfinite(r.are) else "-"
            se = f"{r.se:.4f}" if np.isfinite(r.se) else "-"
            lines.append(f"{r.estimator:<10} {r.family:<7} {nu:>5} {r.d:>2} {asv:>9} {are:>7} {se:>7}  {r.method}")
        return "\n".join(lines)


def are_table(
    specs: Sequence[EllipticalSpec],
    estimators: Sequence[str],
    outer: int = 10**4,
    inner: int = 10**3,
    seed: int = 0,
) -> AREReport:
    """Relative efficiencies of shape estimators versus the regular shape
    estimator, one row per (estimator, spec).

    Rows whose moment conditions fail are marked method="undefined". The
    symmetrized sign estimator has no closed form; its rows carry external
    reference values with method="reference".
    """
    rows = []
    for i, spec in enumerate(specs):
        try:
            tau_reg = tau_regular(spec)
        except MomentUndefinedError:
            tau_reg = None
        for estimator in estimators:
            if estimator == "duembgen":
                ref = DUEMBGEN_REFERENCE_ARE.get(
                    (spec.d, spec.family, spec.nu if spec.family == "t" else None)
                )
                rows.append(AreRow(estimator, spec.family, spec.nu, spec.d,
                                   float("nan"), ref if ref is not None else float("nan"),
                                   "reference", float("nan")))
                continue
            if tau_reg is None:
                rows.append(AreRow(estimator, spec.family, spec.nu, spec.d,
                                   float("nan"), float("nan"), "undefined", float("nan")))
                continue
            try:
                est = asv_offdiag(estimator, spec, outer=outer, inner=inner, seed=seed + 1000 * i)
            except MomentUndefinedError:
                rows.append(AreRow(estimator, spec.family, spec.nu, spec.d,
                                   float("nan"), float("nan"), "undefined", float("nan")))
                continue
            are = tau_reg / est.value
            se = tau_reg * est.se / est.value**2
            rows.append(AreRow(estimator, spec.family, spec.nu, spec.d,
                               est.value, are, est.method, se))
    return AREReport(tuple(rows))


def write_if_curves_csv(path, curves: Sequence[IFCurve]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["estimator", "r", "alpha", "beta", "se"])
        for curve in curves:
            ses = curve.mc_se if curve.mc_se is not None else np.zeros_like(curve.grid)
            for r, a, b, s in zip(curve.grid, curve.alpha, curve.beta, ses):
                writer.writerow([curve.estimator_kind, f"{r:.10g}", f"{a:.10g}", f"{b:.10g}", f"{s:.10g}"])


def write_are_csv(path, report: AREReport):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["estimator", "family", "nu", "d", "asv", "are", "method", "se"])
        for r in report.rows:
            writer.writerow([
                r.estimator, r.family, "" if r.nu is None else f"{r.nu:g}", r.d,
                f"{r.asv:.10g}", f"{r.are:.10g}", r.method, f"{r.se:.10g}",
            ])
