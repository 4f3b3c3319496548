"""Piston cycle time and push-pull circuit midpoint voltage test models.

Both are cheap algebraic models with hand-derived natural-scale gradients.
Gradients are propagated forward through the same intermediates used for the
value, one ``(..., m)`` derivative array per intermediate.
"""

from __future__ import annotations

import numpy as np

from .model import ModelSpec, ParameterSpec

PISTON_PARAMETERS = (
    ParameterSpec("M", 30.0, 60.0, "kg"),
    ParameterSpec("S", 0.005, 0.020, "m^2"),
    ParameterSpec("V0", 0.002, 0.010, "m^3"),
    ParameterSpec("k", 1000.0, 5000.0, "N/m"),
    ParameterSpec("P0", 90000.0, 110000.0, "N/m^2"),
    ParameterSpec("Ta", 290.0, 296.0, "K"),
    ParameterSpec("T0", 340.0, 360.0, "K"),
)

CIRCUIT_PARAMETERS = (
    ParameterSpec("Rb1", 50.0, 150.0, "K-Ohms"),
    ParameterSpec("Rb2", 25.0, 70.0, "K-Ohms"),
    ParameterSpec("Rf", 0.5, 3.0, "K-Ohms"),
    ParameterSpec("Rc1", 1.2, 2.5, "K-Ohms"),
    ParameterSpec("Rc2", 0.25, 1.20, "K-Ohms"),
    ParameterSpec("beta", 50.0, 300.0, "Amperes"),
)


def _as_float(z):
    # keeps extended precision (np.longdouble) inputs intact
    z = np.asarray(z)
    return z if z.dtype.kind == "f" else z.astype(float)


def _unit(z, i):
    e = np.zeros_like(z)
    e[..., i] = 1.0
    return e


def _piston(z, with_grad):
    z = _as_float(z)
    M, S, V0, k, P0, Ta, T0 = (z[..., i] for i in range(7))
    q = P0 * V0 * Ta / T0
    A = P0 * S + 19.62 * M - k * V0 / S
    D = np.sqrt(A * A + 4.0 * k * q)
    V = S / (2.0 * k) * (D - A)
    den = k + S * S * q / (V * V)
    t = 2.0 * np.pi * np.sqrt(M / den)
    if not with_grad:
        return t

    c = lambda a: a[..., None]  # noqa: E731
    eM, eS, ek = _unit(z, 0), _unit(z, 1), _unit(z, 3)
    zero = np.zeros_like(q)
    dq = np.stack([zero, zero, q / V0, zero, q / P0, q / Ta, -q / T0], axis=-1)
    dA = np.stack([np.full_like(q, 19.62), P0 + k * V0 / S**2, -k / S, -V0 / S, S, zero, zero], axis=-1)
    dkq = c(k) * dq + c(q) * ek
    dD = (c(A) * dA + 2.0 * dkq) / c(D)
    dV = c(V / S) * eS + c(S / (2.0 * k)) * (dD - dA) - c(V / k) * ek
    dden = ek + (c(2.0 * S * q) * eS + c(S * S) * dq) / c(V * V) - c(2.0 * S * S * q / V**3) * dV
    return c(t) * (eM / c(2.0 * M) - dden / c(2.0 * den))


def _circuit(z, with_grad):
    z = _as_float(z)
    Rb1, Rb2, Rf, Rc1, Rc2, beta = (z[..., i] for i in range(6))
    s = Rb1 + Rb2
    Vb1 = 12.0 * Rb2 / s
    bc = beta * (Rc2 + 9.0)
    den = bc + Rf
    r = bc / den
    out = (Vb1 + 0.74) * r + 11.35 * Rf / den + 0.74 * Rf * r / Rc1
    if not with_grad:
        return out

    c = lambda a: a[..., None]  # noqa: E731
    eRf, eRc1 = _unit(z, 2), _unit(z, 3)
    zero = np.zeros_like(s)
    dVb1 = np.stack([-12.0 * Rb2 / s**2, 12.0 * Rb1 / s**2, zero, zero, zero, zero], axis=-1)
    dbc = np.stack([zero, zero, zero, zero, beta, Rc2 + 9.0], axis=-1)
    dden = dbc + eRf
    dr = (dbc * c(den) - c(bc) * dden) / c(den * den)
    d1 = dVb1 * c(r) + c(Vb1 + 0.74) * dr
    d2 = 11.35 * (eRf * c(den) - c(Rf) * dden) / c(den * den)
    d3 = 0.74 * (eRf * c(r / Rc1) + c(Rf / Rc1) * dr - c(Rf * r / Rc1**2) * eRc1)
    return d1 + d2 + d3


def piston_time(z):
    return _piston(z, False)


def piston_gradient(z):
    return _piston(z, True)


def circuit_voltage(z):
    return _circuit(z, False)


def circuit_gradient(z):
    return _circuit(z, True)


BENCHMARKS = ("piston", "circuit")


def build(name: str) -> ModelSpec:
    """Return the ModelSpec registered under ``name`` ("piston" or "circuit")."""
    if name == "piston":
        return ModelSpec("piston", PISTON_PARAMETERS, piston_time, piston_gradient)
    if name == "circuit":
        return ModelSpec("circuit", CIRCUIT_PARAMETERS, circuit_voltage, circuit_gradient)
    raise ValueError(f"unknown benchmark {name!r}; choose from {BENCHMARKS}")
