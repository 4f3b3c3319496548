"""Active-subspace sensitivity metrics: eigenpairs of C, activity scores, checks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateModelError, PreconditionError
from .mc import make_rng, uniform_points
from .model import ModelSpec, eval_normalized
from .symeig import eigh

# Constant printed in the activity-score bound on total indices.
PRINTED_BOUND_CONSTANT = 1.0 / (4.0 * math.pi**2)
# Poincare constant for density 1/2 on [-1, 1]: Var(u) <= (4 / pi^2) E[u'^2].
RESCALED_BOUND_CONSTANT = 4.0 / math.pi**2


@dataclass(frozen=True)
class ActiveSubspace:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source: str = "quadrature"
    seed: Optional[int] = None
    samples: Optional[int] = None

    @classmethod
    def from_matrix(cls, C, source="quadrature", seed=None, samples=None) -> "ActiveSubspace":
        dec = eigh(C, psd=True)
        return cls(dec.eigenvalues, dec.eigenvectors, source, seed, samples)

    @property
    def m(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class ActivityScores:
    n: int
    scores: np.ndarray


def activity_scores(sub: ActiveSubspace, n: int) -> ActivityScores:
    """alpha_i(n) = sum_{j <= n} lambda_j * W_ij^2."""
    if not 1 <= n <= sub.m:
        raise PreconditionError(f"subspace dimension must be in [1, {sub.m}], got {n}")
    W = sub.eigenvectors[:, :n]
    return ActivityScores(n, (W * W) @ sub.eigenvalues[:n])


def activity_score_table(sub: ActiveSubspace) -> np.ndarray:
    """Scores for every n: entry ``[i, n-1]`` is alpha_i(n)."""
    return np.cumsum(sub.eigenvectors**2 * sub.eigenvalues, axis=1)


def select_dimension(sub: ActiveSubspace) -> int:
    """Dimension at the largest drop between consecutive eigenvalues (smallest n on ties)."""
    lam = sub.eigenvalues
    if len(lam) < 2:
        raise PreconditionError("dimension selection needs m >= 2")
    if not lam[0] > 0.0:
        raise DegenerateModelError("all eigenvalues are zero; the model is constant", metric="activity_score")
    gaps = lam[:-1] - lam[1:]
    return int(np.argmax(gaps)) + 1


def first_eigenvector(sub: ActiveSubspace) -> np.ndarray:
    lam = sub.eigenvalues
    if len(lam) > 1 and lam[0] - lam[1] <= 1e-12 * abs(lam[0]):
        warnings.warn("leading eigenvalue is not simple; first eigenvector is not unique", stacklevel=2)
    return sub.eigenvectors[:, 0].copy()


def theorem_checks(
    sub: ActiveSubspace,
    nu,
    tau,
    variance: float,
    n: Optional[int | list[int]] = None,
    bound_constant: float = PRINTED_BOUND_CONSTANT,
) -> dict:
    """Check alpha_i(n) <= nu_i and tau_i <= c (alpha_i(n) + lambda_{n+1}) / V.

    ``n`` may be one dimension, a list, or None for all of 1..m;
    lambda_{m+1} is taken as 0. Violations are reported, not raised. Each
    entry carries ``slack = rhs - lhs``; an entry holds when the slack is
    at least ``-1e-9`` times the larger side (floored at 1).
    """
    nu = np.asarray(nu, dtype=float)
    tau = np.asarray(tau, dtype=float)
    m = sub.m
    dims = list(range(1, m + 1)) if n is None else ([n] if isinstance(n, int) else list(n))
    lam = np.append(sub.eigenvalues, 0.0)
    table = activity_score_table(sub)

    def entry(i, d, lhs, rhs):
        tol = 1e-9 * max(1.0, abs(lhs), abs(rhs))
        return {"parameter": i, "n": d, "lhs": float(lhs), "rhs": float(rhs),
                "slack": float(rhs - lhs), "holds": bool(rhs - lhs >= -tol)}

    t1, t2 = [], []
    for d in dims:
        alpha = table[:, d - 1]
        for i in range(m):
            t1.append(entry(i, d, alpha[i], nu[i]))
            t2.append(entry(i, d, tau[i], bound_constant * (alpha[i] + lam[d]) / variance))
    return {
        "theorem1": {"holds": all(e["holds"] for e in t1), "entries": t1},
        "theorem1_equality_error": float(np.max(np.abs(table[:, -1] - nu))),
        "theorem2": {"holds": all(e["holds"] for e in t2), "constant": bound_constant, "entries": t2},
    }


def summary_plot_data(spec: ModelSpec, sub: ActiveSubspace, N: int, seed: int) -> np.ndarray:
    """Rows ``(w1^T x, w2^T x, f(x))`` for N uniform samples."""
    if N < 0:
        raise PreconditionError("number of summary samples must be nonnegative")
    if spec.m < 2:
        raise PreconditionError("summary plots need m >= 2")
    X = uniform_points(make_rng(seed, "summary"), N, spec.m)
    if N == 0:
        return np.empty((0, 3))
    f = eval_normalized(spec, X)
    av = X @ sub.eigenvectors[:, :2]
    return np.column_stack([av, f])


def normalize_metric(gamma) -> np.ndarray:
    """|gamma_i| / ||gamma||_2, the scaling used for cross-metric ranking."""
    g = np.abs(np.asarray(gamma, dtype=float))
    norm = np.linalg.norm(g)
    return g / norm if norm > 0 else g


def ranking(gamma) -> list[int]:
    """Parameter indices from most to least important by |gamma|."""
    return [int(i) for i in np.argsort(-normalize_metric(gamma), kind="stable")]
