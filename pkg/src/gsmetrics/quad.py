"""Tensor-product Gauss-Legendre quadrature under the uniform density on [-1, 1]^m.

One-dimensional weights are normalized to sum to one, so the tensor weight of
a grid node is the plain product of 1D weights. Grids are traversed in
odometer order (last coordinate fastest) and never materialized whole: the
trailing dimensions form a block of at most ``BLOCK_NODES`` nodes that is
evaluated in one vectorized call, the leading dimensions are enumerated.
Block sums are combined with Kahan compensation.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import DegenerateModelError, NumericalError, PreconditionError
from .model import ModelSpec, eval_normalized, grad_normalized

BLOCK_NODES = 1 << 15
MAX_NODES = 10**8


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def k(self) -> int:
        return len(self.nodes)


def _legendre_and_derivative(x: float, k: int) -> tuple[float, float]:
    p0, p1 = 1.0, x
    for d in range(1, k):
        p0, p1 = p1, ((2 * d + 1) * x * p1 - d * p0) / (d + 1)
    dp = k * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre(k: int) -> QuadratureRule:
    """k-point Gauss-Legendre rule with weights summing to 1.

    Roots of the degree-k Legendre polynomial are found by Newton iteration
    from Chebyshev-like initial guesses; only the nonnegative half is
    computed and mirrored, so the rule is exactly symmetric.
    """
    if not 1 <= k <= 50:
        raise PreconditionError(f"number of quadrature points must be in [1, 50], got {k}")
    nodes = np.empty(k)
    weights = np.empty(k)
    for i in range((k + 1) // 2):
        x = math.cos(math.pi * (i + 0.75) / (k + 0.5))
        for _ in range(100):
            p, dp = _legendre_and_derivative(x, k)
            dx = p / dp
            x -= dx
            if abs(dx) <= 1e-16:
                break
        else:
            raise NumericalError(f"Newton iteration for Gauss-Legendre node {i} of {k} did not converge")
        if k % 2 == 1 and i == k // 2:
            x = 0.0
        _, dp = _legendre_and_derivative(x, k)
        w = 1.0 / ((1.0 - x * x) * dp * dp)  # standard weight 2/(...), halved
        nodes[i], nodes[k - 1 - i] = -x, x
        weights[i] = weights[k - 1 - i] = w
    weights /= math.fsum(weights)
    return QuadratureRule(nodes, weights)


class _Kahan:
    """Elementwise compensated sum of equally shaped arrays."""

    def __init__(self, shape):
        self.total = np.zeros(shape)
        self.comp = np.zeros(shape)

    def add(self, value):
        y = value - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t


def _grid_layout(m: int, k: int) -> tuple[int, int]:
    inner = m
    while inner > 0 and k**inner > BLOCK_NODES:
        inner -= 1
    return m - inner, inner


def _block_sum(func, rule, outer_idx, inner_pts, inner_w):
    head = rule.nodes[list(outer_idx)]
    head_w = float(np.prod(rule.weights[list(outer_idx)])) if outer_idx else 1.0
    pts = np.hstack([np.broadcast_to(head, (len(inner_pts), len(head))), inner_pts])
    vals = np.asarray(func(pts), dtype=float)
    return head_w * np.tensordot(inner_w, vals, axes=1)


def integrate(
    func: Callable[[np.ndarray], np.ndarray],
    m: int,
    rule: QuadratureRule | int,
    workers: int = 1,
) -> np.ndarray:
    """Expectation of ``func`` under the uniform density by tensor quadrature.

    ``func`` maps an ``(N, m)`` batch of normalized points to an array with
    leading axis N. With ``workers > 1`` the enumeration of leading
    dimensions is split into contiguous ranges whose partial sums are combined
    in range order; ``workers=1`` is the bitwise-reproducible mode.
    """
    if isinstance(rule, int):
        rule = gauss_legendre(rule)
    k = rule.k
    if k**m > MAX_NODES:
        raise PreconditionError(
            f"tensor grid with {k}^{m} = {k**m:.3e} nodes exceeds the limit of {MAX_NODES:.0e}"
        )
    n_outer, n_inner = _grid_layout(m, k)
    inner_pts = np.array(list(itertools.product(rule.nodes, repeat=n_inner))).reshape(-1, n_inner)
    inner_w = np.prod(np.array(list(itertools.product(rule.weights, repeat=n_inner))).reshape(-1, n_inner), axis=1)
    outer = list(itertools.product(range(k), repeat=n_outer))

    def run(indices: Iterable[tuple[int, ...]]):
        acc = None
        for idx in indices:
            s = _block_sum(func, rule, idx, inner_pts, inner_w)
            if acc is None:
                acc = _Kahan(s.shape)
            acc.add(s)
        return acc.total

    if workers <= 1 or len(outer) < 2:
        return run(outer)
    bounds = np.linspace(0, len(outer), min(workers, len(outer)) + 1).astype(int)
    ranges = [outer[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, ranges))
    acc = _Kahan(parts[0].shape)
    for part in parts:
        acc.add(part)
    return acc.total


@dataclass
class Moments:
    mean: float | None = None
    variance: float | None = None
    C: np.ndarray | None = None
    nu: np.ndarray | None = None


def tensor_integrate(
    spec: ModelSpec,
    k: int = 7,
    want: Iterable[str] = ("mean", "variance", "C", "nu"),
    workers: int = 1,
) -> Moments:
    """Mean, variance, gradient outer-product matrix C and DGSMs in one pass.

    ``want`` selects any subset of ``{"mean", "variance", "C", "nu"}``; the
    model is evaluated only if mean or variance is requested and
    differentiated only if C or nu is.
    """
    want = set(want)
    unknown = want - {"mean", "variance", "C", "nu"}
    if unknown:
        raise ValueError(f"unknown moments requested: {sorted(unknown)}")
    m = spec.m
    need_f = bool(want & {"mean", "variance"})
    need_g = bool(want & {"C", "nu"})
    # shifted data keeps the one-pass variance free of cancellation
    shift = eval_normalized(spec, np.zeros(m)) if need_f else 0.0

    def integrand(x):
        cols = []
        if need_f:
            f = eval_normalized(spec, x) - shift
            cols += [f[:, None], (f * f)[:, None]]
        if need_g:
            g = grad_normalized(spec, x)
            cols.append((g[:, :, None] * g[:, None, :]).reshape(len(x), m * m))
        return np.hstack(cols)

    sums = integrate(integrand, m, k, workers=workers)
    out = Moments()
    pos = 0
    if need_f:
        e1, e2 = sums[0], sums[1]
        pos = 2
        if "mean" in want:
            out.mean = float(e1 + shift)
        if "variance" in want:
            out.variance = float(max(e2 - e1 * e1, 0.0))
    if need_g:
        C = sums[pos:].reshape(m, m)
        C = 0.5 * (C + C.T)
        if "C" in want:
            out.C = C
        if "nu" in want:
            out.nu = np.diag(C).copy()
    return out


def legendre_orthonormal(x, p: int) -> np.ndarray:
    """Values of the degree 0..p Legendre polynomials orthonormal under density 1/2.

    Returns an array of shape ``x.shape + (p + 1,)``.
    """
    x = np.asarray(x, dtype=float)
    P = np.empty(x.shape + (p + 1,))
    P[..., 0] = 1.0
    if p >= 1:
        P[..., 1] = x
    for d in range(1, p):
        P[..., d + 1] = ((2 * d + 1) * x * P[..., d] - d * P[..., d - 1]) / (d + 1)
    return P * np.sqrt(2 * np.arange(p + 1) + 1.0)


@dataclass(frozen=True)
class LegendreCoefficients:
    """Pseudospectral coefficients of the orthonormal tensor Legendre basis.

    ``coeffs[d1, ..., dm]`` is the coefficient of the multi-index
    ``(d1, ..., dm)``.
    """

    degree: int
    coeffs: np.ndarray

    def __getitem__(self, multi_index):
        return self.coeffs[tuple(multi_index)]

    @property
    def m(self) -> int:
        return self.coeffs.ndim

    @property
    def mean(self) -> float:
        return float(self.coeffs[(0,) * self.m])

    @property
    def variance(self) -> float:
        c2 = self.coeffs**2
        return float(c2.sum() - c2[(0,) * self.m])


def grid_values(spec: ModelSpec, rule: QuadratureRule) -> np.ndarray:
    """Model values on the full tensor grid, shape ``(k,) * m``, odometer order."""
    m, k = spec.m, rule.k
    if k**m > MAX_NODES:
        raise PreconditionError(f"tensor grid with {k}^{m} nodes exceeds the limit of {MAX_NODES:.0e}")
    n_outer, n_inner = _grid_layout(m, k)
    inner_pts = np.array(list(itertools.product(rule.nodes, repeat=n_inner))).reshape(-1, n_inner)
    F = np.empty((k**n_outer, len(inner_pts)))
    for row, idx in enumerate(itertools.product(range(k), repeat=n_outer)):
        head = rule.nodes[list(idx)]
        pts = np.hstack([np.broadcast_to(head, (len(inner_pts), n_outer)), inner_pts])
        F[row] = eval_normalized(spec, pts)
    return F.reshape((k,) * m)


def legendre_coefficients(spec: ModelSpec, k: int = 7, p: int | None = None) -> LegendreCoefficients:
    """Project the model onto tensor Legendre polynomials of degree <= p per axis.

    Uses sum factorization: the 1D projection ``Phi^T diag(w)`` is applied
    along each axis of the grid-value tensor in turn.
    """
    if p is None:
        p = k - 1
    if p >= k:
        raise PreconditionError(f"coefficient degree p={p} must be below the number of points k={k}")
    if p < 0:
        raise PreconditionError("coefficient degree must be nonnegative")
    rule = gauss_legendre(k)
    T = (legendre_orthonormal(rule.nodes, p) * rule.weights[:, None]).T  # (p+1, k)
    c = grid_values(spec, rule)
    for axis in range(spec.m):
        c = np.moveaxis(np.tensordot(T, c, axes=([1], [axis])), 0, axis)
    return LegendreCoefficients(p, c)


def reference_tsi(coeffs: LegendreCoefficients) -> np.ndarray:
    """Total sensitivity indices from squared Legendre coefficients.

    The variance of every ANOVA term involving input i is the squared mass of
    the multi-indices with a nonzero degree in dimension i.
    """
    c2 = coeffs.coeffs**2
    total = coeffs.variance
    if not total > 0.0:
        raise DegenerateModelError("model has zero variance; total indices undefined", metric="tsi")
    tau = np.empty(coeffs.m)
    for i in range(coeffs.m):
        sl = [slice(None)] * coeffs.m
        sl[i] = slice(1, None)
        tau[i] = c2[tuple(sl)].sum() / total
    return tau


def reference_linear_coeffs(coeffs: LegendreCoefficients, variance: float) -> np.ndarray:
    """Standardized linear coefficients from the degree-1 Legendre terms.

    The monomial slope is ``sqrt(3) * c(e_i)``; dividing by ``sqrt(3) * sigma``
    leaves ``c(e_i) / sigma``.
    """
    if not variance > 0.0:
        raise DegenerateModelError("model has zero variance; linear coefficients undefined", metric="linear_coeff")
    m = coeffs.m
    if coeffs.degree < 1:
        raise PreconditionError("linear coefficients need degree >= 1")
    first = np.array([coeffs[tuple(1 if j == i else 0 for j in range(m))] for i in range(m)])
    return first / math.sqrt(variance)
