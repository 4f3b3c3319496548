"""End-to-end pipelines: quadrature references, Monte Carlo runs, convergence studies."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import active
from .active import ActiveSubspace
from .bootstrap import BootstrapConfig, bootstrap_eigvec_se, bootstrap_se
from .errors import GSMError, PreconditionError
from .mc import (
    METRICS,
    MetricEstimate,
    dgsm_statistic,
    jansen_statistic,
    jansen_tsi,
    linear_statistic,
    mc_c_matrix,
    mc_dgsm,
    mc_linear_coeffs,
)
from .model import ModelSpec
from .quad import legendre_coefficients, reference_linear_coeffs, reference_tsi, tensor_integrate

DEFAULT_M_GRID = tuple(int(round(v)) for v in np.logspace(np.log10(50), np.log10(50000), 7))


@dataclass
class Reference:
    """Quadrature reference values of all five metrics."""

    spec: ModelSpec
    k: int
    mean: float
    variance: float
    C: np.ndarray
    subspace: ActiveSubspace
    n: int
    values: dict[str, np.ndarray]

    @property
    def evaluations(self) -> int:
        return self.k**self.spec.m


def reference(spec: ModelSpec, k: int = 7, n: Optional[int] = None, workers: int = 1) -> Reference:
    mom = tensor_integrate(spec, k, workers=workers)
    coeffs = legendre_coefficients(spec, k, k - 1)
    sub = ActiveSubspace.from_matrix(mom.C, source="quadrature")
    if n is None:
        n = active.select_dimension(sub) if spec.m > 1 else 1
    w1 = active.first_eigenvector(sub)
    values = {
        "tsi": reference_tsi(coeffs),
        "dgsm": mom.nu,
        "linear_coeff": reference_linear_coeffs(coeffs, mom.variance),
        "eigvec1": w1,
        "activity_score": active.activity_scores(sub, n).scores,
    }
    return Reference(spec, k, mom.mean, mom.variance, mom.C, sub, n, values)


@dataclass
class MonteCarloRun:
    spec: ModelSpec
    M: int
    seed: int
    n: int
    estimates: dict[str, MetricEstimate]
    subspace: ActiveSubspace
    bootstrap: BootstrapConfig = field(repr=False, default=None)


def tsi_budget(M: int, m: int) -> int:
    """Per-matrix sample count M' with (m + 1) M' <= M."""
    return M // (m + 1)


def _run_metric(metric, spec, M, seed, boot):
    m = spec.m
    cfg = lambda name: BootstrapConfig(boot.replicates, boot.seed, f"boot_{name}")  # noqa: E731
    if metric == "tsi":
        est = jansen_tsi(spec, tsi_budget(M, m), seed)
        est.standard_errors = bootstrap_se(jansen_statistic, est.samples, cfg("tsi"))
        return est
    if metric == "dgsm":
        est = mc_dgsm(spec, M, seed)
        est.extras["formula_standard_errors"] = est.standard_errors
        est.standard_errors = bootstrap_se(dgsm_statistic, est.samples, cfg("dgsm"))
        return est
    if metric == "linear_coeff":
        est = mc_linear_coeffs(spec, M, seed)
        est.standard_errors = bootstrap_se(linear_statistic, est.samples, cfg("linear_coeff"))
        return est
    raise ValueError(metric)


def monte_carlo(
    spec: ModelSpec,
    M: int,
    seed: int,
    replicates: int = 100,
    n: Optional[int] = None,
    boot_seed: Optional[int] = None,
    threads: int = 1,
) -> MonteCarloRun:
    """All five metrics by Monte Carlo with bootstrap standard errors.

    Total indices use M' = floor(M / (m + 1)) so every metric costs at most M
    model evaluations; the other estimators draw M points from their own
    sub-streams of ``seed``. ``boot_seed`` defaults to ``seed``.
    """
    m = spec.m
    if tsi_budget(M, m) < 2:
        raise PreconditionError(
            f"M={M} gives M'={tsi_budget(M, m)} < 2 for the total indices; need M >= {2 * (m + 1)}"
        )
    boot = BootstrapConfig(replicates, seed if boot_seed is None else boot_seed)

    def named(metric, fn):
        try:
            return fn()
        except GSMError as err:
            if getattr(err, "metric", "missing") is None:
                err.metric = metric
            raise

    def subspace_part():
        C, batch = mc_c_matrix(spec, M, seed)
        sub = ActiveSubspace.from_matrix(C, source="monte_carlo", seed=seed, samples=M)
        dim = n if n is not None else (active.select_dimension(sub) if m > 1 else 1)
        bs = bootstrap_eigvec_se(batch.gradients, BootstrapConfig(boot.replicates, boot.seed, "boot_cmatrix"), dim)
        w1 = MetricEstimate("eigvec1", active.first_eigenvector(sub), bs.w1_se, M, seed, samples=batch.gradients)
        alpha = MetricEstimate(
            "activity_score", active.activity_scores(sub, dim).scores, bs.alpha_se, M, seed, extras={"n": dim}
        )
        return sub, dim, w1, alpha

    jobs = {
        "tsi": lambda: _run_metric("tsi", spec, M, seed, boot),
        "dgsm": lambda: _run_metric("dgsm", spec, M, seed, boot),
        "linear_coeff": lambda: _run_metric("linear_coeff", spec, M, seed, boot),
        "subspace": subspace_part,
    }
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {k: pool.submit(named, k, fn) for k, fn in jobs.items()}
            results = {k: f.result() for k, f in futures.items()}
    else:
        results = {k: named(k, fn) for k, fn in jobs.items()}
    sub, dim, w1, alpha = results["subspace"]
    estimates = {
        "tsi": results["tsi"],
        "dgsm": results["dgsm"],
        "linear_coeff": results["linear_coeff"],
        "eigvec1": w1,
        "activity_score": alpha,
    }
    return MonteCarloRun(spec, M, seed, dim, estimates, sub, boot)


def align_sign(estimate: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Flip ``estimate`` if it points away from ``target``."""
    return -estimate if float(np.dot(estimate, target)) < 0.0 else estimate


def relative_error(ref: np.ndarray, est: np.ndarray) -> np.ndarray:
    """|gamma_i - gamma_hat_i| / max_j |gamma_j|."""
    return np.abs(ref - est) / np.max(np.abs(ref))


def loglog_slope(Ms: Sequence[float], values: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(values) against log(M); None for fewer than 2 points."""
    Ms = np.asarray(Ms, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(Ms) < 2:
        return None
    slope, _ = np.polyfit(np.log(Ms), np.log(values), 1)
    return float(slope)


@dataclass
class ConvergenceStudy:
    """Trial-averaged errors and standard errors, indexed [metric][M position, parameter]."""

    spec: ModelSpec
    Ms: list[int]
    trials: int
    rel_error: dict[str, np.ndarray]
    std_error: dict[str, np.ndarray]
    mean_estimate: dict[str, np.ndarray]
    mean_raw_se: dict[str, np.ndarray]
    reference: Reference

    def metric_curve(self, metric: str, kind: str = "rel_error") -> np.ndarray:
        """Per-M average over parameters of the trial-averaged quantity."""
        table = self.rel_error if kind == "rel_error" else self.std_error
        return table[metric].mean(axis=1)

    def slopes(self) -> dict[str, dict[str, Optional[float]]]:
        return {
            metric: {
                kind: loglog_slope(self.Ms, self.metric_curve(metric, kind))
                for kind in ("rel_error", "std_error")
            }
            for metric in METRICS
        }


def converge(
    spec: ModelSpec,
    ref: Reference,
    Ms: Sequence[int] = DEFAULT_M_GRID,
    trials: int = 10,
    seed: int = 0,
    replicates: int = 100,
    threads: int = 1,
) -> ConvergenceStudy:
    """Monte Carlo error and standard-error study against quadrature references.

    Trial t uses seed ``seed + t`` for sampling and bootstrap alike. Standard
    errors are normalized by the largest-magnitude Monte Carlo estimate of the
    same trial, never by the reference. Activity scores use the reference
    subspace dimension.
    """
    Ms = [int(v) for v in Ms]
    if trials < 1:
        raise PreconditionError("need at least one trial")

    def one_trial(t):
        out = []
        for M in Ms:
            run = monte_carlo(spec, M, seed + t, replicates, n=ref.n)
            row = {}
            for metric in METRICS:
                est = run.estimates[metric]
                vals = est.values
                if metric == "eigvec1":
                    vals = align_sign(vals, ref.values[metric])
                scale = np.max(np.abs(vals))
                row[metric] = (
                    relative_error(ref.values[metric], vals),
                    est.standard_errors / scale if scale > 0 else est.standard_errors,
                    vals,
                    est.standard_errors,
                )
            out.append(row)
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_trial = list(pool.map(one_trial, range(trials)))
    else:
        per_trial = [one_trial(t) for t in range(trials)]

    def avg(metric, slot):
        return np.array([[per_trial[t][j][metric][slot] for t in range(trials)] for j in range(len(Ms))]).mean(axis=1)

    return ConvergenceStudy(
        spec,
        Ms,
        trials,
        {metric: avg(metric, 0) for metric in METRICS},
        {metric: avg(metric, 1) for metric in METRICS},
        {metric: avg(metric, 2) for metric in METRICS},
        {metric: avg(metric, 3) for metric in METRICS},
        ref,
    )
