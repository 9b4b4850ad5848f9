"""Shared fixtures and brute-force oracles.

The oracles here are deliberately naive (explicit pair loops) so they stay
independent of the compiled fast paths they check.
"""

import numpy as np
import pytest

import ginicov as gc


def brute_gcm(data: np.ndarray) -> np.ndarray:
    n, d = data.shape
    total = np.zeros((d, d))
    for i in range(n):
        for j in range(i + 1, n):
            delta = data[i] - data[j]
            norm = np.linalg.norm(delta)
            if norm > 0:
                total += np.outer(delta, delta) / norm
    return total / (n * (n - 1) / 2)


def brute_sscm(data: np.ndarray) -> np.ndarray:
    n, d = data.shape
    total = np.zeros((d, d))
    for i in range(n):
        for j in range(i + 1, n):
            delta = data[i] - data[j]
            norm = np.linalg.norm(delta)
            if norm > 0:
                u = delta / norm
                total += np.outer(u, u)
    return total / (n * (n - 1) / 2)


def brute_rank(x: np.ndarray, data: np.ndarray, skip=None) -> np.ndarray:
    total = np.zeros(data.shape[1])
    count = 0
    for j in range(data.shape[0]):
        if skip is not None and j == skip:
            continue
        delta = x - data[j]
        norm = np.linalg.norm(delta)
        if norm > 0:
            total += delta / norm
        count += 1
    return total / count


def brute_rcm(data: np.ndarray) -> np.ndarray:
    n, d = data.shape
    total = np.zeros((d, d))
    for i in range(n):
        r = brute_rank(data[i], data, skip=i)
        total += np.outer(r, r)
    return total / n


def brute_gmd(xs: np.ndarray) -> float:
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            total += abs(xs[i] - xs[j])
    return total / (n * (n - 1) / 2)


def random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def random_spd(rng: np.random.Generator, d: int, cond: float = 100.0) -> np.ndarray:
    q = random_orthogonal(rng, d)
    eigs = np.exp(np.linspace(0.0, np.log(cond), d))
    eigs *= rng.uniform(0.5, 2.0)
    return (q * eigs) @ q.T


@pytest.fixture(scope="session")
def spherical_10k():
    """One fixed 10^4-row standard bivariate normal sample."""
    return gc.draw(gc.EllipticalSpec("normal", 2), 10_000, 314159).data


@pytest.fixture(scope="session")
def spherical_shapes_10k(spherical_10k):
    """Trace-normalized estimates of the five comparison estimators on the
    shared spherical sample (computed once per session)."""
    data = spherical_10k
    zero = np.zeros(2)
    return {
        "cov": gc.to_shape(gc.sample_covariance(data).m).w,
        "tr-gini": gc.to_shape(gc.tr_gini(data).estimate.m).w,
        "tyler": gc.tyler_m(data, zero).estimate.w,
        "duembgen": gc.duembgen(data).estimate.w,
        "mrcm": gc.to_shape(gc.mrcm(data, "mad").m).w,
    }
