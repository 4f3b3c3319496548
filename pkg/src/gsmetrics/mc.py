"""Seeded Monte Carlo estimators: Jansen total indices, DGSMs, linear fits, C-hat.

Random numbers come from numpy's Philox-4x64 counter-based generator. The
128-bit key is ``seed + (stream << 64)``: the low word carries the user seed,
the high word a fixed stream id per estimator, so every estimator draws from
its own platform-independent sub-stream of one seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateModelError, NumericalError, PreconditionError
from .model import ModelSpec, eval_normalized, grad_normalized

STREAMS = {
    "tsi": 1,
    "dgsm": 2,
    "linear_coeff": 3,
    "cmatrix": 4,
    "bootstrap": 5,
    "summary": 6,
    "boot_tsi": 11,
    "boot_dgsm": 12,
    "boot_linear_coeff": 13,
    "boot_cmatrix": 14,
}

METRICS = ("tsi", "dgsm", "linear_coeff", "eigvec1", "activity_score")

_U64 = (1 << 64) - 1


def make_rng(seed: int, stream: str | int = 0) -> np.random.Generator:
    sid = STREAMS[stream] if isinstance(stream, str) else int(stream)
    return np.random.Generator(np.random.Philox(key=(int(seed) & _U64) + (sid << 64)))


def uniform_points(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=(n, m))


@dataclass
class SampleBatch:
    seed: int
    points: np.ndarray
    values: Optional[np.ndarray] = None
    gradients: Optional[np.ndarray] = None


@dataclass
class MetricEstimate:
    """Point estimates and standard errors of one metric for every parameter.

    ``samples`` holds the per-sample rows the estimate was computed from, so
    the bootstrap can resample them without re-evaluating the model.
    """

    metric: str
    values: np.ndarray
    standard_errors: np.ndarray
    evaluations_used: int
    seed: int
    samples: Optional[np.ndarray] = field(default=None, repr=False)
    extras: dict = field(default_factory=dict)


def jansen_statistic(rows: np.ndarray) -> np.ndarray:
    """Jansen's estimator from rows ``(f_A, f_B1, ..., f_Bm)``.

    ``tau_i = ||f_A - f_Bi||^2 / (2 M' var(f_A))`` with the M'-1 sample variance.
    """
    fA = rows[:, 0]
    var = np.var(fA, ddof=1)
    if not var > 0.0:
        raise DegenerateModelError("sample variance of f_A is zero", metric="tsi")
    diff = fA[:, None] - rows[:, 1:]
    return np.sum(diff * diff, axis=0) / (2.0 * len(rows) * var)


def jansen_tsi(spec: ModelSpec, Mprime: int, seed: int) -> MetricEstimate:
    """Jansen total-index estimate from 2 M' uniform draws (matrices A and B).

    Costs M' (m + 1) evaluations: f_A plus one vector per input.
    """
    if Mprime < 2:
        raise PreconditionError(f"Jansen estimator needs M' >= 2, got {Mprime}")
    m = spec.m
    rng = make_rng(seed, "tsi")
    A = uniform_points(rng, Mprime, m)
    B = uniform_points(rng, Mprime, m)
    rows = np.empty((Mprime, m + 1))
    rows[:, 0] = eval_normalized(spec, A)
    for i in range(m):
        # A with column i taken from B: f_A and f_Bi share every input except x_i,
        # so their squared difference isolates the total effect of x_i
        Bi = A.copy()
        Bi[:, i] = B[:, i]
        rows[:, i + 1] = eval_normalized(spec, Bi)
    tau = jansen_statistic(rows)
    return MetricEstimate("tsi", tau, np.zeros(m), Mprime * (m + 1), seed, samples=rows)


def dgsm_statistic(grads: np.ndarray) -> np.ndarray:
    return np.mean(grads * grads, axis=0)


def dgsm_formula_se(grads: np.ndarray) -> np.ndarray:
    # verbatim: [1/(M-1) * sum((g^2 - nu)^2)]^(1/2), no 1/sqrt(M) factor
    sq = grads * grads
    return np.sqrt(np.sum((sq - sq.mean(axis=0)) ** 2, axis=0) / (len(sq) - 1))


def mc_dgsm(spec: ModelSpec, M: int, seed: int) -> MetricEstimate:
    """Mean squared normalized partial derivatives over M uniform points.

    ``standard_errors`` carries the closed-form spread of the squared
    derivatives, ``[sum((g_ij^2 - nu_i)^2) / (M-1)]^(1/2)``. Note this is the
    per-sample standard deviation; the standard error of the mean is that
    value divided by ``sqrt(M)``, reported in ``extras["se_of_mean"]``.
    """
    if M < 2:
        raise PreconditionError(f"DGSM estimator needs M >= 2, got {M}")
    rng = make_rng(seed, "dgsm")
    X = uniform_points(rng, M, spec.m)
    G = grad_normalized(spec, X)
    se = dgsm_formula_se(G)
    return MetricEstimate(
        "dgsm", dgsm_statistic(G), se, M, seed, samples=G, extras={"se_of_mean": se / np.sqrt(M)}
    )


def linear_fit(X: np.ndarray, f: np.ndarray) -> tuple[float, np.ndarray]:
    """Least-squares intercept and slopes of ``f ~ b0 + X b``."""
    D = np.hstack([np.ones((len(X), 1)), X])
    # QR instead of normal equations: squares the condition number otherwise
    Q, R = np.linalg.qr(D)
    d = np.abs(np.diag(R))
    if len(X) < D.shape[1] or d.min() <= 1e-12 * d.max():
        raise NumericalError("linear least-squares design is rank deficient")
    coef = np.linalg.solve(R, Q.T @ f)
    return float(coef[0]), coef[1:]


def linear_statistic(rows: np.ndarray) -> np.ndarray:
    """Standardized coefficients ``b_i / (sqrt(3) sigma_f)`` from rows ``(x_1..x_m, f)``."""
    X, f = rows[:, :-1], rows[:, -1]
    sigma = np.std(f, ddof=1)
    if not sigma > 0.0:
        raise DegenerateModelError("sample standard deviation of f is zero", metric="linear_coeff")
    _, b = linear_fit(X, f)
    return b / (np.sqrt(3.0) * sigma)


def mc_linear_coeffs(spec: ModelSpec, M: int, seed: int) -> MetricEstimate:
    m = spec.m
    if M < m + 2:
        raise PreconditionError(f"linear fit needs M >= m + 2 = {m + 2}, got {M}")
    rng = make_rng(seed, "linear_coeff")
    X = uniform_points(rng, M, m)
    f = eval_normalized(spec, X)
    b0, b = linear_fit(X, f)
    rows = np.hstack([X, f[:, None]])
    beta = linear_statistic(rows)
    return MetricEstimate(
        "linear_coeff", beta, np.zeros(m), M, seed, samples=rows, extras={"intercept": b0, "slopes": b}
    )


def c_matrix(grads: np.ndarray) -> np.ndarray:
    C = grads.T @ grads / len(grads)
    return 0.5 * (C + C.T)


def mc_c_matrix(spec: ModelSpec, M: int, seed: int) -> tuple[np.ndarray, SampleBatch]:
    """Monte Carlo estimate of C = E[grad f grad f^T]; the batch is kept for bootstrap."""
    if M < 1:
        raise PreconditionError(f"C estimate needs M >= 1, got {M}")
    rng = make_rng(seed, "cmatrix")
    X = uniform_points(rng, M, spec.m)
    G = grad_normalized(spec, X)
    return c_matrix(G), SampleBatch(seed, X, gradients=G)
