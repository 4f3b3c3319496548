"""Cyclic Jacobi eigensolver for small dense symmetric matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, PreconditionError

MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns, orthonormal


def _check_symmetric(A) -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PreconditionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise PreconditionError("matrix has non-finite entries")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * scale:
        raise PreconditionError("matrix is not symmetric")
    return 0.5 * (A + A.T)


def _fix_signs(W: np.ndarray) -> np.ndarray:
    # largest-magnitude component positive; near-ties resolved by lowest index
    W = W.copy()
    for j in range(W.shape[1]):
        mag = np.abs(W[:, j])
        i = int(np.flatnonzero(mag >= mag.max() * (1.0 - 1e-12))[0])
        if W[i, j] < 0:
            W[:, j] = -W[:, j]
    return W


def eigh(A, psd: bool = False) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps continue until the off-diagonal Frobenius norm drops to
    ``1e-14 * ||A||_F``. Eigenvalues are returned in descending order and each
    eigenvector is signed so its largest-magnitude component is positive.

    With ``psd=True`` the input must be positive semidefinite up to roundoff
    (smallest eigenvalue >= -1e-10 * largest); small negative eigenvalues are
    clamped to zero.
    """
    a = _check_symmetric(A)
    n = a.shape[0]
    V = np.eye(n)
    tol = 1e-14 * np.linalg.norm(a)
    for _ in range(MAX_SWEEPS):
        off = np.linalg.norm(a[~np.eye(n, dtype=bool)])
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta  # theta**2 would overflow
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * cp - s * cq, s * cp + c * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :], a[q, :] = c * rp - s * rq, s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp - s * vq, s * vp + c * vq
    else:
        raise NumericalError(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")

    lam = np.diag(a).copy()
    order = np.argsort(-lam, kind="stable")
    lam, V = lam[order], V[:, order]
    if psd and n:
        if lam[-1] < -1e-10 * max(lam[0], 0.0) or (lam[0] <= 0.0 and lam[-1] < 0.0):
            raise PreconditionError(f"matrix is not positive semidefinite (smallest eigenvalue {lam[-1]:.3e})")
        lam = np.maximum(lam, 0.0)
    return EigenDecomposition(lam, _fix_signs(V))


def _check_orthonormal(W, label):
    W = np.asarray(W, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    if W.ndim != 2:
        raise PreconditionError(f"{label} must be a matrix")
    err = np.max(np.abs(W.T @ W - np.eye(W.shape[1])))
    if err > 1e-8:
        raise PreconditionError(f"{label} columns are not orthonormal (max deviation {err:.2e})")
    return W


def subspace_distance(W1, V1) -> float:
    """Spectral norm of the difference of the orthogonal projectors onto two subspaces.

    Equals the sine of the largest principal angle between the column spans.
    """
    W1 = _check_orthonormal(W1, "W1")
    V1 = _check_orthonormal(V1, "V1")
    if W1.shape != V1.shape:
        raise PreconditionError(f"shape mismatch: {W1.shape} vs {V1.shape}")
    D = W1 @ W1.T - V1 @ V1.T
    lam = eigh(0.5 * (D + D.T)).eigenvalues
    return float(min(np.max(np.abs(lam)), 1.0))
