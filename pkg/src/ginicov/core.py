"""Shared data model: samples, scatter/shape matrices, configuration, linear algebra."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "GiniCovError",
    "NonFiniteError",
    "EmptySampleError",
    "TooFewObservationsError",
    "SingularMatrixError",
    "DegenerateSampleError",
    "ZeroTraceError",
    "MomentUndefinedError",
    "DimensionMismatchError",
    "Sample",
    "ScatterMatrix",
    "ShapeMatrix",
    "EstimatorConfig",
    "as_sample",
    "as_matrix",
    "sym_eigen",
    "inv_sqrt",
    "frobenius",
]

SCATTER_KINDS = (
    "cov", "gcm", "sscm", "rcm", "tr-gini", "kotz-m", "tyler", "duembgen", "mrcm",
)
CONSISTENCY_TAGS = ("raw", "normal", "known-f")

# Relative eigenvalue floor below which a matrix is treated as singular.
EIG_FLOOR = 1e-12
# Allowed PSD slack: smallest eigenvalue >= -PSD_SLACK * trace.
PSD_SLACK = 1e-10


class GiniCovError(Exception):
    """Base class for errors raised by this package."""


class NonFiniteError(GiniCovError, ValueError):
    """Input or iterate contains NaN or infinity."""


class EmptySampleError(GiniCovError, ValueError):
    """Sample with zero rows."""


class TooFewObservationsError(GiniCovError, ValueError):
    """Operation needs more observations than the sample provides."""


class SingularMatrixError(GiniCovError, ValueError):
    """Matrix is singular below the eigenvalue floor."""


class DegenerateSampleError(GiniCovError, ValueError):
    """Observations (or their pairwise differences) concentrate on a hyperplane."""


class ZeroTraceError(GiniCovError, ValueError):
    """Shape normalization of a matrix with nonpositive trace."""


class MomentUndefinedError(GiniCovError, ValueError):
    """A required distributional moment does not exist."""


class DimensionMismatchError(GiniCovError, ValueError):
    """Incompatible matrix or sample dimensions."""


def _validated_data(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatchError("sample data must be a 2-d array of shape (n, d)")
    if arr.shape[0] < 1:
        raise EmptySampleError("sample needs at least one observation")
    if arr.shape[1] < 1:
        raise DimensionMismatchError("sample needs at least one column")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("sample entries must be finite")
    return np.ascontiguousarray(arr)


@dataclass(frozen=True)
class Sample:
    """An n x d table of finite real observations."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _validated_data(self.data))
        self.data.setflags(write=False)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def as_sample(x: Union[Sample, np.ndarray, list]) -> Sample:
    return x if isinstance(x, Sample) else Sample(x)


def _validated_square(m, *, what: str = "matrix") -> np.ndarray:
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"{what} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{what} entries must be finite")
    scale = max(np.abs(arr).max(), 1.0)
    if np.abs(arr - arr.T).max() > 1e-8 * scale:
        raise DimensionMismatchError(f"{what} must be symmetric")
    return 0.5 * (arr + arr.T)


@dataclass(frozen=True)
class ScatterMatrix:
    """Symmetric PSD d x d matrix tagged with estimator provenance.

    `kind` records which estimator produced it; `consistency` records the
    scale convention ("raw", "normal" for Fisher consistency at the normal
    model, "known-f" for an explicitly supplied constant).
    """

    m: np.ndarray
    kind: str = "cov"
    consistency: str = "raw"

    def __post_init__(self):
        arr = _validated_square(self.m, what="scatter matrix")
        if self.kind not in SCATTER_KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.consistency not in CONSISTENCY_TAGS:
            raise ValueError(f"unknown consistency tag {self.consistency!r}")
        tr = float(np.trace(arr))
        lo = float(np.linalg.eigvalsh(arr)[0])
        if lo < -PSD_SLACK * max(tr, 1.0):
            raise ValueError("scatter matrix is not positive semi-definite")
        object.__setattr__(self, "m", arr)
        self.m.setflags(write=False)

    @property
    def d(self) -> int:
        return self.m.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.m))


@dataclass(frozen=True)
class ShapeMatrix:
    """Scatter normalized to trace d."""

    w: np.ndarray
    kind: str = "cov"

    def __post_init__(self):
        arr = _validated_square(self.w, what="shape matrix")
        d = arr.shape[0]
        tr = float(np.trace(arr))
        if abs(tr - d) > 1e-10 * d:
            raise ValueError(f"shape matrix must have trace {d}, got {tr}")
        object.__setattr__(self, "w", arr)
        self.w.setflags(write=False)

    @property
    def d(self) -> int:
        return self.w.shape[0]


def as_matrix(est) -> np.ndarray:
    """Plain ndarray view of a ScatterMatrix, ShapeMatrix, or array."""
    if isinstance(est, ScatterMatrix):
        return est.m
    if isinstance(est, ShapeMatrix):
        return est.w
    return np.asarray(est, dtype=np.float64)


@dataclass(frozen=True)
class EstimatorConfig:
    """Fixed-point iteration settings.

    c_convention controls the pairwise-distance constant of the
    affine equivariant Gini estimator: "normal" (default) uses the
    closed-form normal constant, "none" drops the factor and estimates
    scatter up to scale, a float supplies the constant explicitly, and
    an elliptical spec requests a Monte Carlo estimate of it.
    """

    tolerance: float = 1e-6
    max_iter: int = 100
    c_convention: object = "normal"

    def __post_init__(self):
        if not (self.tolerance > 0):
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(m), "fro"))


def sym_eigen(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns eigenvalues in descending order and the matching orthonormal
    eigenvectors as columns, so that V @ diag(vals) @ V.T reconstructs m.
    """
    arr = _validated_square(m)
    vals, vecs = np.linalg.eigh(arr)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def inv_sqrt(m) -> np.ndarray:
    """Symmetric inverse square root R with R @ m @ R = I.

    Raises SingularMatrixError when the smallest eigenvalue falls below
    EIG_FLOOR times the trace.
    """
    arr = as_matrix(m)
    vals, vecs = sym_eigen(arr)
    floor = EIG_FLOOR * max(float(np.trace(arr)), np.finfo(np.float64).tiny)
    if vals[-1] <= floor:
        raise SingularMatrixError(
            f"matrix is singular: smallest eigenvalue {vals[-1]:.3e} below floor {floor:.3e}"
        )
    r = (vecs / np.sqrt(vals)) @ vecs.T
    return 0.5 * (r + r.T)
