"""Elliptical model specs, samplers, and the distributional constants they calibrate.

Supported families: multivariate normal, multivariate t(nu), and the
double-exponential-type elliptical family whose standardized radius is
Gamma(d, 1) (the multivariate Laplace generalization referred to here as
"kotz"). Samplers are deterministic given (spec, n, seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .core import DimensionMismatchError, MomentUndefinedError, NonFiniteError, Sample

__all__ = [
    "EllipticalSpec",
    "MonteCarloValue",
    "draw",
    "c_pairwise",
    "c_first",
    "tau_regular",
    "radial_pdf",
    "radial_ppf",
    "mean_squared_radius",
    "normal_pairwise_constant",
    "spec_to_json",
    "spec_from_json",
]

FAMILIES = ("normal", "t", "kotz")


def normal_pairwise_constant(d: int) -> float:
    """Expected pairwise distance of two independent standard normal vectors,
    2 Gamma((d+1)/2) / Gamma(d/2)."""
    return 2.0 * math.exp(gammaln((d + 1) / 2.0) - gammaln(d / 2.0))


def _chi_mean(d: int) -> float:
    return math.sqrt(2.0) * math.exp(gammaln((d + 1) / 2.0) - gammaln(d / 2.0))


@dataclass(frozen=True)
class EllipticalSpec:
    """Generative description: family, dimension, location, scatter.

    nu is the t degrees of freedom (a positive real); it is ignored for the
    other families. Moment guards are enforced per operation, not here.
    """

    family: str
    d: int
    nu: Optional[float] = None
    location: Optional[np.ndarray] = None
    scatter: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.family == "t":
            if self.nu is None or not (self.nu > 0):
                raise ValueError("t family needs nu > 0")
        loc = np.zeros(self.d) if self.location is None else np.asarray(self.location, dtype=np.float64)
        if loc.shape != (self.d,):
            raise DimensionMismatchError("location must be a d-vector")
        sca = np.eye(self.d) if self.scatter is None else np.asarray(self.scatter, dtype=np.float64)
        if sca.shape != (self.d, self.d):
            raise DimensionMismatchError("scatter must be d x d")
        if not (np.all(np.isfinite(loc)) and np.all(np.isfinite(sca))):
            raise NonFiniteError("non-finite location or scatter")
        sca = 0.5 * (sca + sca.T)
        if np.linalg.eigvalsh(sca)[0] <= 0:
            raise ValueError("scatter must be positive definite")
        object.__setattr__(self, "location", loc)
        object.__setattr__(self, "scatter", sca)
        loc.setflags(write=False)
        sca.setflags(write=False)

    def spherical(self) -> "EllipticalSpec":
        """The associated spherical model (location 0, identity scatter)."""
        return EllipticalSpec(self.family, self.d, nu=self.nu)

    @property
    def is_spherical(self) -> bool:
        return (
            np.array_equal(self.location, np.zeros(self.d))
            and np.array_equal(self.scatter, np.eye(self.d))
        )


def spec_to_json(spec: EllipticalSpec) -> dict:
    obj = {
        "family": spec.family,
        "d": spec.d,
        "mu": spec.location.tolist(),
        "sigma": spec.scatter.tolist(),
    }
    if spec.family == "t":
        obj["nu"] = spec.nu
    return obj


def spec_from_json(obj) -> EllipticalSpec:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return EllipticalSpec(
        family=obj["family"],
        d=int(obj["d"]),
        nu=obj.get("nu"),
        location=obj.get("mu"),
        scatter=obj.get("sigma"),
    )


def _spherical_block(rng: np.random.Generator, family: str, nu, d: int, n: int) -> np.ndarray:
    if family == "normal":
        return rng.standard_normal((n, d))
    if family == "t":
        w = rng.chisquare(nu, n)
        z = rng.standard_normal((n, d))
        return z * np.sqrt(nu / w)[:, None]
    # gamma radius times uniform direction
    r = rng.gamma(shape=d, scale=1.0, size=n)
    z = rng.standard_normal((n, d))
    norms = np.linalg.norm(z, axis=1)
    norms[norms == 0.0] = 1.0
    return (r / norms)[:, None] * z


def draw(spec: EllipticalSpec, n: int, seed) -> Sample:
    """n i.i.d. rows from the spec; bit-identical for a fixed (spec, n, seed).

    seed may be an integer or a numpy SeedSequence (the latter lets callers
    derive disjoint replicate streams)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.default_rng(seq)
    z = _spherical_block(rng, spec.family, spec.nu, spec.d, n)
    chol = np.linalg.cholesky(spec.scatter)
    return Sample(z @ chol.T + spec.location)


@dataclass(frozen=True)
class MonteCarloValue:
    """A scalar with its estimation method and standard error."""

    value: float
    se: float = 0.0
    method: str = "closed-form"


def _require_first_moment(spec: EllipticalSpec):
    if spec.family == "t" and spec.nu <= 1:
        raise MomentUndefinedError(f"t({spec.nu}) has no first moment")


def c_pairwise(spec: EllipticalSpec, mc_size: int = 10**6, seed: int = 0) -> MonteCarloValue:
    """Expected pairwise distance E||X1 - X2|| under the associated spherical law.

    Closed form for the normal family; Monte Carlo with a reported standard
    error otherwise.
    """
    _require_first_moment(spec)
    if spec.family == "normal":
        return MonteCarloValue(normal_pairwise_constant(spec.d))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    x1 = _spherical_block(rng, spec.family, spec.nu, spec.d, mc_size)
    x2 = _spherical_block(rng, spec.family, spec.nu, spec.d, mc_size)
    dist = np.linalg.norm(x1 - x2, axis=1)
    return MonteCarloValue(
        float(dist.mean()), float(dist.std(ddof=1) / math.sqrt(mc_size)), "monte-carlo"
    )


def c_first(spec: EllipticalSpec) -> float:
    """Expected radius E||X|| under the associated spherical law (closed form)."""
    _require_first_moment(spec)
    d = spec.d
    if spec.family == "normal":
        return _chi_mean(d)
    if spec.family == "t":
        nu = spec.nu
        t_factor = math.sqrt(nu) * math.exp(gammaln((nu - 1) / 2.0) - gammaln(nu / 2.0)) / math.sqrt(2.0)
        return t_factor * _chi_mean(d)
    return float(d)


def mean_squared_radius(spec: EllipticalSpec) -> float:
    """E||X||^2 under the associated spherical law."""
    d = spec.d
    if spec.family == "normal":
        return float(d)
    if spec.family == "t":
        if spec.nu <= 2:
            raise MomentUndefinedError(f"t({spec.nu}) has no second moment")
        return d * spec.nu / (spec.nu - 2.0)
    return float(d * (d + 1))


def tau_regular(spec: EllipticalSpec) -> float:
    """Off-diagonal asymptotic variance of the regular (covariance) shape
    estimator, 1 + kurtosis."""
    if spec.family == "normal":
        return 1.0
    if spec.family == "t":
        if spec.nu <= 4:
            raise MomentUndefinedError(f"t({spec.nu}) has no fourth moment")
        return (spec.nu - 2.0) / (spec.nu - 4.0)
    return (spec.d + 3.0) / (spec.d + 1.0)


def radial_pdf(spec: EllipticalSpec, r) -> np.ndarray:
    """Density of the standardized radius ||Sigma^{-1/2}(X - mu)||."""
    r = np.asarray(r, dtype=np.float64)
    out = np.zeros_like(r)
    pos = r >= 0
    d, nu = spec.d, spec.nu
    rp = r[pos]
    if spec.family == "normal":
        out[pos] = stats.chi.pdf(rp, df=d)
    elif spec.family == "t":
        log_c = (
            math.log(2.0)
            + gammaln((nu + d) / 2.0)
            - gammaln(d / 2.0)
            - gammaln(nu / 2.0)
            - (d / 2.0) * math.log(nu)
        )
        vals = np.zeros_like(rp)
        nz = rp > 0
        vals[nz] = np.exp(
            log_c + (d - 1) * np.log(rp[nz]) - ((d + nu) / 2.0) * np.log1p(rp[nz] ** 2 / nu)
        )
        if d == 1:
            vals[~nz] = math.exp(log_c)
        out[pos] = vals
    else:
        out[pos] = stats.gamma.pdf(rp, a=d, scale=1.0)
    return out if out.ndim else float(out)


def radial_ppf(spec: EllipticalSpec, u) -> np.ndarray:
    """Quantile function of the standardized radius."""
    u = np.asarray(u, dtype=np.float64)
    d, nu = spec.d, spec.nu
    if spec.family == "normal":
        return stats.chi.ppf(u, df=d)
    if spec.family == "t":
        return np.sqrt(d * stats.f.ppf(u, d, nu))
    return stats.gamma.ppf(u, a=d, scale=1.0)
