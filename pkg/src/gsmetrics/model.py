"""Model abstraction and the affine map onto the normalized hypercube [-1, 1]^m.

Models are written on their natural parameter scale. Every metric in the
package is computed for the normalized model ``x -> f(to_natural(x))``, whose
partial derivatives pick up the factor ``(max_i - min_i) / 2`` from the chain
rule.

Evaluators are vectorized: ``evaluate`` and ``gradient`` receive an array whose
last axis has length ``m`` (a single point of shape ``(m,)`` or a batch of
shape ``(N, m)``) and return shapes ``()``/``(N,)`` and ``(m,)``/``(N, m)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, EvaluationError, PreconditionError

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    min: float
    max: float
    units: str = ""

    def __post_init__(self):
        if not self.name:
            raise PreconditionError("parameter name must be nonempty")
        if not (np.isfinite(self.min) and np.isfinite(self.max)):
            raise PreconditionError(f"parameter {self.name!r}: range must be finite")
        if not self.min < self.max:
            raise PreconditionError(
                f"parameter {self.name!r}: need min < max, got [{self.min}, {self.max}]"
            )

    @property
    def half_width(self) -> float:
        return 0.5 * (self.max - self.min)


@dataclass(frozen=True)
class ModelSpec:
    """A differentiable model on a hyperrectangle of natural-scale parameters.

    Parameters
    ----------
    name : str
        Label used in reports.
    parameters : sequence of ParameterSpec
        Ordered inputs; the order fixes the coordinate order everywhere.
    evaluate : callable
        Natural-scale point(s) -> model output(s).
    gradient : callable
        Natural-scale point(s) -> natural-scale partial derivatives.
    """

    name: str
    parameters: tuple[ParameterSpec, ...]
    evaluate: ArrayFn
    gradient: ArrayFn

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(self.parameters))
        if len(self.parameters) < 1:
            raise PreconditionError("a model needs at least one parameter")
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise PreconditionError(f"duplicate parameter names in {names}")

    @property
    def m(self) -> int:
        return len(self.parameters)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.parameters]

    @property
    def lower(self) -> np.ndarray:
        return np.array([p.min for p in self.parameters], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([p.max for p in self.parameters], dtype=float)

    @property
    def scale(self) -> np.ndarray:
        """Chain-rule factors (max - min) / 2."""
        return 0.5 * (self.upper - self.lower)


def _check_shape(spec: ModelSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != spec.m:
        raise DimensionError(
            f"expected points with {spec.m} coordinates, got array of shape {x.shape}"
        )
    return x


def _check_hypercube(x: np.ndarray) -> None:
    if not np.all(np.abs(x) <= 1.0):
        bad = np.argwhere(~(np.abs(x) <= 1.0))[0]
        raise PreconditionError(f"point outside [-1, 1]^m at index {tuple(bad)}")


def to_natural(spec: ModelSpec, x) -> np.ndarray:
    x = _check_shape(spec, x)
    lo, hi = spec.lower, spec.upper
    return lo + (x + 1.0) * (hi - lo) / 2.0


def to_normalized(spec: ModelSpec, z) -> np.ndarray:
    """Inverse of :func:`to_natural`."""
    z = _check_shape(spec, z)
    lo, hi = spec.lower, spec.upper
    return 2.0 * (z - lo) / (hi - lo) - 1.0


def _first_bad(arr: np.ndarray) -> int:
    flat = arr.reshape(arr.shape[0], -1) if arr.ndim > 1 else arr[:, None]
    return int(np.flatnonzero(~np.all(np.isfinite(flat), axis=1))[0])


def eval_normalized(spec: ModelSpec, x):
    """Evaluate the model at normalized point(s).

    Returns a float for a single point and an ``(N,)`` array for a batch.
    Raises :class:`EvaluationError` carrying the offending point when the
    model output is not finite.
    """
    x = _check_shape(spec, x)
    _check_hypercube(x)
    f = np.asarray(spec.evaluate(to_natural(spec, x)), dtype=float)
    if x.ndim == 1:
        if not np.isfinite(f):
            raise EvaluationError(f"non-finite model output {f} at {x}", point=x)
        return float(f)
    if f.shape != x.shape[:1]:
        raise DimensionError(f"evaluate returned shape {f.shape}, expected {x.shape[:1]}")
    if not np.all(np.isfinite(f)):
        j = _first_bad(f)
        raise EvaluationError(f"non-finite model output at sample {j}: {x[j]}", point=x[j], index=j)
    return f


def grad_normalized(spec: ModelSpec, x) -> np.ndarray:
    """Gradient with respect to the normalized coordinates.

    Component i is ``(max_i - min_i) / 2`` times the natural-scale partial
    derivative at ``to_natural(x)``.
    """
    x = _check_shape(spec, x)
    _check_hypercube(x)
    g = np.asarray(spec.gradient(to_natural(spec, x)), dtype=float)
    if g.shape != x.shape:
        raise DimensionError(f"gradient returned shape {g.shape}, expected {x.shape}")
    g = g * spec.scale
    if not np.all(np.isfinite(g)):
        if x.ndim == 1:
            raise EvaluationError(f"non-finite gradient {g} at {x}", point=x)
        j = _first_bad(g)
        raise EvaluationError(f"non-finite gradient at sample {j}: {x[j]}", point=x[j], index=j)
    return g


def make_model(
    name: str,
    parameters: Sequence[ParameterSpec | tuple],
    evaluate: ArrayFn,
    gradient: ArrayFn,
) -> ModelSpec:
    """Convenience constructor accepting ``(name, min, max[, units])`` tuples."""
    params = [p if isinstance(p, ParameterSpec) else ParameterSpec(*p) for p in parameters]
    return ModelSpec(name, tuple(params), evaluate, gradient)
