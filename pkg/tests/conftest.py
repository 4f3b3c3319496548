import numpy as np
import pytest

from gsmetrics import benchmarks
from gsmetrics.analysis import DEFAULT_M_GRID, converge, reference
from gsmetrics.model import make_model

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record(label, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def longdouble_fd(spec, x, h=1e-6):
    """Central differences of the natural-scale model evaluated in extended precision."""
    x = np.asarray(x, dtype=np.longdouble)
    lo = np.array(spec.lower, dtype=np.longdouble)
    hi = np.array(spec.upper, dtype=np.longdouble)
    nat = lambda u: lo + (u + 1) * (hi - lo) / 2  # noqa: E731
    out = np.empty(spec.m)
    for i in range(spec.m):
        e = np.zeros(spec.m, dtype=np.longdouble)
        e[i] = h
        out[i] = float((spec.evaluate(nat(x + e)) - spec.evaluate(nat(x - e))) / (2 * np.longdouble(h)))
    return out


def _square_box(m):
    return [(f"x{i + 1}", -1.0, 1.0) for i in range(m)]


def toy(kind, m=2, c=1.0):
    """Small closed-form models on [-1, 1]^m for oracle checks."""
    if kind == "x1":
        f = lambda z: z[..., 0] + 0.0  # noqa: E731
        g = lambda z: np.concatenate([np.ones_like(z[..., :1]), np.zeros_like(z[..., 1:])], axis=-1)  # noqa: E731
    elif kind == "quadratic":
        f = lambda z: c * 0.5 * np.sum(z[..., :2] ** 2, axis=-1)  # noqa: E731
        g = lambda z: c * np.concatenate([z[..., :2], np.zeros_like(z[..., 2:])], axis=-1)  # noqa: E731
    elif kind == "constant":
        f = lambda z: np.full(z.shape[:-1], c)  # noqa: E731
        g = lambda z: np.zeros_like(z)  # noqa: E731
    elif kind == "x1_plus_x2sq":
        f = lambda z: z[..., 0] + z[..., 1] ** 2  # noqa: E731
        g = lambda z: np.concatenate(  # noqa: E731
            [np.ones_like(z[..., :1]), 2 * z[..., 1:2], np.zeros_like(z[..., 2:])], axis=-1
        )
    else:
        raise KeyError(kind)
    return make_model(kind, _square_box(m), f, g)


@pytest.fixture(scope="session")
def piston():
    return benchmarks.build("piston")


@pytest.fixture(scope="session")
def circuit():
    return benchmarks.build("circuit")


@pytest.fixture(scope="session")
def piston_ref(piston):
    return reference(piston, 7)


@pytest.fixture(scope="session")
def circuit_ref(circuit):
    return reference(circuit, 7)


@pytest.fixture(scope="session")
def refs(piston_ref, circuit_ref):
    return {"piston": piston_ref, "circuit": circuit_ref}


@pytest.fixture(scope="session")
def studies(refs):
    """Full 7-point, 10-trial convergence studies (about a minute per model)."""
    return {
        name: converge(ref.spec, ref, DEFAULT_M_GRID, trials=10, seed=0, replicates=100)
        for name, ref in refs.items()
    }
