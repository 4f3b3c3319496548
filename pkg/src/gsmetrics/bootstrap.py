"""Nonparametric bootstrap standard errors from stored Monte Carlo samples.

Rows are resampled as units with replacement; the model is never
re-evaluated. All resample index sets come serially from one seeded stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateModelError, NumericalError, PreconditionError
from .mc import c_matrix, make_rng
from .symeig import eigh


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 100
    seed: int = 0
    stream: str | int = "bootstrap"

    def __post_init__(self):
        if self.replicates < 10:
            raise PreconditionError(f"need at least 10 bootstrap replicates, got {self.replicates}")


def _replicates(statistic, data, config):
    data = np.asarray(data)
    n = len(data)
    if n < 2:
        raise PreconditionError("bootstrap needs at least 2 rows")
    rng = make_rng(config.seed, config.stream)
    reps = []
    attempts = 0
    last_error = None
    while len(reps) < config.replicates:
        if attempts >= 10 * config.replicates:
            raise type(last_error)(
                f"bootstrap gave up after {attempts} degenerate resamples: {last_error}"
            )
        attempts += 1
        idx = rng.integers(0, n, size=n)
        try:
            reps.append(np.asarray(statistic(data[idx]), dtype=float))
        except (DegenerateModelError, NumericalError) as err:
            last_error = err
    return np.array(reps)


def _spread(reps: np.ndarray) -> np.ndarray:
    # shifting by the first replicate makes identical replicates give exactly 0
    return np.std(reps - reps[0], axis=0, ddof=1)


def bootstrap_se(
    statistic: Callable[[np.ndarray], np.ndarray],
    data,
    config: BootstrapConfig = BootstrapConfig(),
) -> np.ndarray:
    """Bootstrap standard error of each component of ``statistic(data)``.

    Degenerate resamples (the statistic raises DegenerateModelError or
    NumericalError) are discarded and redrawn, up to 10 * B attempts.
    """
    return _spread(_replicates(statistic, data, config))


@dataclass
class EigvecBootstrap:
    w1_se: np.ndarray
    alpha_se: np.ndarray
    w1_replicates: np.ndarray
    alpha_replicates: np.ndarray


def bootstrap_eigvec_se(grads, config: BootstrapConfig = BootstrapConfig(), n: int = 1) -> EigvecBootstrap:
    """Standard errors of the first eigenvector and activity scores of C-hat.

    Each replicate eigenvector is flipped to have a nonnegative inner product
    with the point-estimate eigenvector before accumulation; otherwise the
    arbitrary sign of an eigenvector would dominate the spread.
    """
    grads = np.asarray(grads, dtype=float)
    m = grads.shape[1]
    if not 1 <= n <= m:
        raise PreconditionError(f"subspace dimension must be in [1, {m}], got {n}")
    ref = eigh(c_matrix(grads), psd=True).eigenvectors[:, :n]

    def statistic(rows):
        dec = eigh(c_matrix(rows), psd=True)
        if not dec.eigenvalues[0] > 0.0:
            raise DegenerateModelError("resampled gradients are all zero", metric="eigvec1")
        W = dec.eigenvectors[:, :n]
        W = W * np.where(np.sum(W * ref, axis=0) < 0.0, -1.0, 1.0)
        alpha = (W * W) @ dec.eigenvalues[:n]
        return np.concatenate([W[:, 0], alpha])

    reps = _replicates(statistic, grads, config)
    se = _spread(reps)
    return EigvecBootstrap(se[:m], se[m:], reps[:, :m], reps[:, m:])
