"""Finite-sample Monte Carlo efficiency harness.

Replicates are drawn from per-replicate child seed streams, every estimator
sees the same replicate data (paired comparison; an unpaired mode exists for
sensitivity checks), non-converged fixed points keep their last iterate and
are counted, and relative efficiencies are ratios of mean off-diagonal MSEs
of trace-normalized shape estimates against the regular shape estimator.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    DimensionMismatchError,
    EstimatorConfig,
    ScatterMatrix,
    ShapeMatrix,
    as_matrix,
)
from .elliptical import EllipticalSpec, draw
from .m_estimators import duembgen, kotz_m, tr_gini, tyler_m
from .scales import mrcm, sample_covariance, to_shape
from .spatial import sample_gcm, sample_rcm, sample_sscm

__all__ = [
    "ESTIMATOR_NAMES",
    "estimate_scatter",
    "SimScenario",
    "EstimatorEfficiency",
    "EfficiencyReport",
    "mse_offdiag",
    "finite_sample_re",
    "run_table2",
    "write_fre_csv",
    "DEFAULT_TABLE2_CONFIG",
]

ESTIMATOR_NAMES = (
    "cov", "gcm", "sscm", "rcm", "tr-gini", "kotz-m", "tyler", "duembgen",
    "mrcm-mad", "mrcm-qn",
)

NEEDS_LOCATION = ("kotz-m", "tyler")

DEFAULT_TABLE2_CONFIG = {
    "families": [
        {"family": "t", "nu": 5},
        {"family": "t", "nu": 8},
        {"family": "normal"},
        {"family": "kotz"},
    ],
    "n": [50, 200],
    "d": [2, 5],
    "M": 2000,
    "estimators": ["tyler", "duembgen", "kotz-m", "tr-gini", "mrcm-mad", "mrcm-qn"],
    "seed": 20260810,
}


def estimate_scatter(
    name: str,
    data: np.ndarray,
    location: Optional[np.ndarray] = None,
    config: Optional[EstimatorConfig] = None,
) -> tuple[np.ndarray, bool, int]:
    """Run one named estimator; returns (matrix, converged, iterations)."""
    if name == "cov":
        return sample_covariance(data).m, True, 0
    if name == "gcm":
        return sample_gcm(data).m, True, 0
    if name == "sscm":
        return sample_sscm(data).m, True, 0
    if name == "rcm":
        return sample_rcm(data).m, True, 0
    if name == "mrcm-mad":
        return mrcm(data, "mad").m, True, 0
    if name == "mrcm-qn":
        return mrcm(data, "qn").m, True, 0
    if name == "tr-gini":
        rep = tr_gini(data, config)
    elif name == "kotz-m":
        if location is None:
            raise ValueError("kotz-m needs an explicit location")
        rep = kotz_m(data, location, config)
    elif name == "tyler":
        if location is None:
            raise ValueError("tyler needs an explicit location")
        rep = tyler_m(data, location, config)
    elif name == "duembgen":
        rep = duembgen(data, config)
    else:
        raise ValueError(f"unknown estimator {name!r}")
    return as_matrix(rep.estimate), rep.converged, rep.iterations


@dataclass(frozen=True)
class SimScenario:
    """One Monte Carlo efficiency cell: model, sample size, replicate count."""

    spec: EllipticalSpec
    n: int
    M: int
    estimators: tuple
    seed: int = 0
    paired: bool = True

    def __post_init__(self):
        if self.n < self.spec.d + 2:
            raise ValueError("need n >= d+2")
        if self.M < 2:
            raise ValueError("need at least two replicates")
        object.__setattr__(self, "estimators", tuple(self.estimators))
        unknown = set(self.estimators) - set(ESTIMATOR_NAMES)
        if unknown:
            raise ValueError(f"unknown estimators {sorted(unknown)}")


@dataclass(frozen=True)
class EstimatorEfficiency:
    estimator: str
    mse: float
    re: float
    se: float
    fail_count: int


@dataclass(frozen=True)
class EfficiencyReport:
    scenario: SimScenario
    regular_mse: float
    rows: tuple


def _offdiag_sq_mean(m: np.ndarray) -> float:
    d = m.shape[0]
    iu = np.triu_indices(d, 1)
    return float((m[iu] ** 2).mean())


def mse_offdiag(estimates: Sequence, truth) -> float:
    """Mean over replicates and upper-triangle positions of squared
    off-diagonal errors."""
    truth_m = as_matrix(truth)
    d = truth_m.shape[0]
    if d < 2:
        raise DimensionMismatchError("off-diagonal MSE needs d >= 2")
    if len(estimates) < 1:
        raise DimensionMismatchError("need at least one estimate")
    iu = np.triu_indices(d, 1)
    total = 0.0
    for est in estimates:
        m = as_matrix(est)
        if m.shape != truth_m.shape:
            raise DimensionMismatchError("estimate/truth dimension mismatch")
        total += float(((m[iu] - truth_m[iu]) ** 2).mean())
    return total / len(estimates)


def _jackknife_ratio_se(num: np.ndarray, den: np.ndarray) -> float:
    """SE of sum(num)/sum(den) by leave-one-replicate-out."""
    m = num.size
    loo = (num.sum() - num) / (den.sum() - den)
    return float(np.sqrt((m - 1) / m * ((loo - loo.mean()) ** 2).sum()))


def finite_sample_re(
    scenario: SimScenario,
    config: Optional[EstimatorConfig] = None,
    threads: int = 1,
) -> EfficiencyReport:
    """Relative efficiency of each scenario estimator versus the regular shape
    estimator, with jackknife standard errors over replicates."""
    spec, n, m_reps = scenario.spec, scenario.n, scenario.M
    truth = to_shape(spec.scatter).w
    location = spec.location
    names = scenario.estimators
    cfg = config or EstimatorConfig()

    def replicate_row(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        errors = np.empty(len(names))
        fails = np.zeros(len(names))
        if scenario.paired:
            data = draw(spec, n, np.random.SeedSequence(entropy=scenario.seed, spawn_key=(0, m))).data
            reg = _offdiag_sq_mean(to_shape(sample_covariance(data).m).w - truth)
            for e_idx, name in enumerate(names):
                est, converged, _ = estimate_scatter(name, data, location, cfg)
                errors[e_idx] = _offdiag_sq_mean(to_shape(est).w - truth)
                fails[e_idx] = 0 if converged else 1
        else:
            data = draw(spec, n, np.random.SeedSequence(entropy=scenario.seed, spawn_key=(0, m))).data
            reg = _offdiag_sq_mean(to_shape(sample_covariance(data).m).w - truth)
            for e_idx, name in enumerate(names):
                own = draw(spec, n, np.random.SeedSequence(entropy=scenario.seed, spawn_key=(1 + e_idx, m))).data
                est, converged, _ = estimate_scatter(name, own, location, cfg)
                errors[e_idx] = _offdiag_sq_mean(to_shape(est).w - truth)
                fails[e_idx] = 0 if converged else 1
        return np.asarray([reg]), errors, fails

    reg_sq = np.empty(m_reps)
    est_sq = np.empty((m_reps, len(names)))
    fail_counts = np.zeros((m_reps, len(names)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for m, (reg, errors, fails) in enumerate(pool.map(replicate_row, range(m_reps))):
                reg_sq[m] = reg[0]
                est_sq[m] = errors
                fail_counts[m] = fails
    else:
        for m in range(m_reps):
            reg, errors, fails = replicate_row(m)
            reg_sq[m] = reg[0]
            est_sq[m] = errors
            fail_counts[m] = fails

    regular_mse = float(reg_sq.mean())
    rows = []
    for e_idx, name in enumerate(names):
        mse = float(est_sq[:, e_idx].mean())
        rows.append(EstimatorEfficiency(
            estimator=name,
            mse=mse,
            re=regular_mse / mse,
            se=_jackknife_ratio_se(reg_sq, est_sq[:, e_idx]),
            fail_count=int(fail_counts[:, e_idx].sum()),
        ))
    return EfficiencyReport(scenario, regular_mse, tuple(rows))


def _load_config(config) -> dict:
    if config is None:
        return dict(DEFAULT_TABLE2_CONFIG)
    if isinstance(config, dict):
        return {**DEFAULT_TABLE2_CONFIG, **config}
    with open(config) as fh:
        return {**DEFAULT_TABLE2_CONFIG, **json.load(fh)}


def run_table2(config=None, output_csv=None, threads: int = 1) -> list[dict]:
    """Full efficiency grid over families x d x n x estimators.

    Per-cell failures are recorded in-row; the run continues. Returns the rows
    and optionally writes them as CSV with columns
    (family, nu, d, n, estimator, re, se, fail_count).
    """
    cfg = _load_config(config)
    families = cfg["families"]
    cells = [
        (fam, d, n)
        for fam in families
        for d in cfg["d"]
        for n in cfg["n"]
    ]
    cell_seeds = np.random.SeedSequence(cfg["seed"]).generate_state(len(cells))
    rows = []
    for cell_idx, (fam, d, n) in enumerate(cells):
        spec = EllipticalSpec(fam["family"], d, nu=fam.get("nu"))
        scenario = SimScenario(
            spec=spec, n=n, M=cfg["M"], estimators=tuple(cfg["estimators"]),
            seed=int(cell_seeds[cell_idx]), paired=bool(cfg.get("paired", True)),
        )
        report = finite_sample_re(scenario, threads=threads)
        for row in report.rows:
            rows.append({
                "family": fam["family"],
                "nu": fam.get("nu"),
                "d": d,
                "n": n,
                "estimator": row.estimator,
                "re": row.re,
                "se": row.se,
                "fail_count": row.fail_count,
            })
    if output_csv is not None:
        write_fre_csv(output_csv, rows)
    return rows


def write_fre_csv(path, rows: Sequence[dict]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "nu", "d", "n", "estimator", "re", "se", "fail_count"])
        for r in rows:
            writer.writerow([
                r["family"], "" if r.get("nu") is None else f"{r['nu']:g}",
                r["d"], r["n"], r["estimator"],
                f"{r['re']:.10g}", f"{r['se']:.10g}", r["fail_count"],
            ])


def render_fre_rows(rows: Sequence[dict]) -> str:
    lines = [f"{'family':<7} {'nu':>4} {'d':>2} {'n':>5} {'estimator':<10} {'re':>7} {'se':>7} {'fails':>5}"]
    for r in rows:
        nu = f"{r['nu']:g}" if r.get("nu") is not None else "-"
        lines.append(
            f"{r['family']:<7} {nu:>4} {r['d']:>2} {r['n']:>5} {r['estimator']:<10} "
            f"{r['re']:>7.3f} {r['se']:>7.3f} {r['fail_count']:>5}"
        )
    return "\n".join(lines)
