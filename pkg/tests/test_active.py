import math
import warnings

import numpy as np
import pytest

from conftest import toy
from gsmetrics.active import (
    PRINTED_BOUND_CONSTANT,
    RESCALED_BOUND_CONSTANT,
    ActiveSubspace,
    activity_score_table,
    activity_scores,
    first_eigenvector,
    normalize_metric,
    ranking,
    select_dimension,
    summary_plot_data,
    theorem_checks,
)
from gsmetrics.analysis import reference
from gsmetrics.errors import DegenerateModelError, PreconditionError
from gsmetrics.model import make_model
from gsmetrics.quad import tensor_integrate
from gsmetrics.symeig import subspace_distance


def diag_subspace(lam):
    lam = np.asarray(lam, dtype=float)
    return ActiveSubspace(lam, np.eye(len(lam)))


def test_piston_activity_scores(piston_ref):
    alpha = activity_scores(piston_ref.subspace, 1).scores
    assert abs(alpha[1] - 0.0437) <= 5e-5 and abs(alpha[2] - 0.0231) <= 5e-5


def test_activity_scores_full_dimension_equal_dgsm(refs):
    for ref in refs.values():
        m = ref.spec.m
        assert np.max(np.abs(activity_scores(ref.subspace, m).scores - np.diag(ref.C))) <= 1e-10


def test_activity_scores_range_check(piston_ref):
    for n in (0, 8):
        with pytest.raises(PreconditionError):
            activity_scores(piston_ref.subspace, n)


def test_activity_scores_monotone_in_dimension(refs):
    for ref in refs.values():
        table = activity_score_table(ref.subspace)
        assert np.all(np.diff(table, axis=1) >= 0)
        for n in range(1, ref.spec.m + 1):
            assert np.allclose(table[:, n - 1], activity_scores(ref.subspace, n).scores, rtol=1e-13, atol=0)


def test_cross_identity_with_leading_eigenpair(refs):
    for ref in refs.values():
        sub = ref.subspace
        alpha = activity_scores(sub, 1).scores
        assert np.max(np.abs(alpha - sub.eigenvalues[0] * sub.eigenvectors[:, 0] ** 2)) <= 1e-12


def test_select_dimension_benchmarks(refs):
    assert select_dimension(refs["piston"].subspace) == 1
    assert select_dimension(refs["circuit"].subspace) == 1


def test_select_dimension_single_large_gap():
    assert select_dimension(diag_subspace([1.0, 1.0, 1e-8])) == 2


def test_select_dimension_ties_pick_smallest():
    assert select_dimension(diag_subspace([3.0, 2.0, 1.0])) == 1


def test_select_dimension_constant_model():
    with pytest.raises(DegenerateModelError):
        select_dimension(diag_subspace([0.0, 0.0]))


def test_first_eigenvector_piston(piston_ref):
    w = first_eigenvector(piston_ref.subspace)
    assert abs(abs(w[1]) - 0.7936) <= 5e-5 and abs(abs(w[2]) - 0.5768) <= 5e-5
    assert np.sign(w[1]) * np.sign(w[2]) == -1


def test_first_eigenvector_circuit(circuit_ref):
    w = first_eigenvector(circuit_ref.subspace)
    assert abs(abs(w[0]) - 0.7407) <= 5e-5 and abs(abs(w[1]) - 0.6112) <= 5e-5
    assert np.sign(w[0]) * np.sign(w[1]) == -1


def test_first_eigenvector_coordinate_function():
    sub = ActiveSubspace.from_matrix(tensor_integrate(toy("x1"), 5, want=("C",)).C)
    assert np.array_equal(first_eigenvector(sub), [1.0, 0.0])


def test_first_eigenvector_warns_when_not_simple():
    sub = ActiveSubspace.from_matrix(tensor_integrate(toy("quadratic"), 5, want=("C",)).C)
    with pytest.warns(UserWarning):
        first_eigenvector(sub)


def test_theorem_one_on_benchmarks(refs):
    for ref in refs.values():
        checks = theorem_checks(ref.subspace, ref.values["dgsm"], ref.values["tsi"], ref.variance)
        assert checks["theorem1"]["holds"]
        assert len(checks["theorem1"]["entries"]) == ref.spec.m**2
        assert checks["theorem1_equality_error"] <= 1e-10


def test_rescaled_total_index_bound_on_benchmarks(refs):
    for ref in refs.values():
        checks = theorem_checks(
            ref.subspace, ref.values["dgsm"], ref.values["tsi"], ref.variance,
            bound_constant=RESCALED_BOUND_CONSTANT,
        )
        assert checks["theorem2"]["holds"]


def test_coordinate_function_counterexample_to_printed_bound():
    # tau_1 = 1, alpha_1(1) = 1, lambda_2 = 0, V = 1/3: the printed constant gives 3/(4 pi^2)
    sub = diag_subspace([1.0, 0.0])
    printed = theorem_checks(sub, [1.0, 0.0], [1.0, 0.0], 1 / 3, n=1)
    entry = printed["theorem2"]["entries"][0]
    assert entry["rhs"] == pytest.approx(3 / (4 * math.pi**2))
    assert not printed["theorem2"]["holds"]
    rescaled = theorem_checks(sub, [1.0, 0.0], [1.0, 0.0], 1 / 3, n=1, bound_constant=RESCALED_BOUND_CONSTANT)
    assert rescaled["theorem2"]["holds"]


def test_rescaled_constant_is_sharp_for_first_eigenfunction():
    # f = sin(pi x / 2) attains Var = (4 / pi^2) E[f'^2]
    spec = make_model(
        "sine", [("x", -1.0, 1.0)],
        lambda z: np.sin(math.pi * z[..., 0] / 2),
        lambda z: math.pi / 2 * np.cos(math.pi * z / 2),
    )
    mom = tensor_integrate(spec, 30)
    assert mom.variance == pytest.approx(RESCALED_BOUND_CONSTANT * mom.nu[0], rel=1e-12)
    assert PRINTED_BOUND_CONSTANT * 16 == pytest.approx(RESCALED_BOUND_CONSTANT)


def test_scale_equivariance(circuit):
    c = 3.0
    scaled = make_model(
        "scaled", circuit.parameters,
        lambda z: c * circuit.evaluate(z), lambda z: c * circuit.gradient(z),
    )
    a, b = reference(circuit, 5), reference(scaled, 5)
    assert np.allclose(b.subspace.eigenvalues, c**2 * a.subspace.eigenvalues, rtol=1e-12, atol=1e-14)
    assert np.allclose(b.values["activity_score"], c**2 * a.values["activity_score"], rtol=1e-12)
    assert a.n == b.n
    for n in range(1, 6):
        assert subspace_distance(a.subspace.eigenvectors[:, :n], b.subspace.eigenvectors[:, :n]) <= 1e-8


def test_summary_rows_piston(piston, piston_ref):
    rows = summary_plot_data(piston, piston_ref.subspace, 500, seed=0)
    assert rows.shape == (500, 3)
    assert np.all(np.abs(rows[:, :2]) <= math.sqrt(7))


def test_summary_coordinate_function():
    spec = toy("x1")
    sub = ActiveSubspace.from_matrix(tensor_integrate(spec, 5, want=("C",)).C)
    row = summary_plot_data(spec, sub, 1, seed=4)[0]
    assert row[0] == row[2]


def test_summary_circuit_nearly_linear(circuit, circuit_ref):
    rows = summary_plot_data(circuit, circuit_ref.subspace, 500, seed=0)
    D = np.column_stack([np.ones(500), rows[:, 0]])
    coef, *_ = np.linalg.lstsq(D, rows[:, 2], rcond=None)
    resid = rows[:, 2] - D @ coef
    r2 = 1 - resid @ resid / np.sum((rows[:, 2] - rows[:, 2].mean()) ** 2)
    assert r2 > 0.95


def test_summary_edge_cases(piston, piston_ref):
    assert summary_plot_data(piston, piston_ref.subspace, 0, seed=0).shape == (0, 3)
    one_d = make_model("line", [("x", -1.0, 1.0)], lambda z: z[..., 0], np.ones_like)
    with pytest.raises(PreconditionError):
        summary_plot_data(one_d, diag_subspace([1.0]), 5, seed=0)


def test_normalization_and_ranking():
    g = np.array([0.3, -0.4, 0.0])
    assert np.allclose(normalize_metric(g), [0.6, 0.8, 0.0])
    assert ranking(g) == [1, 0, 2]
    assert np.array_equal(normalize_metric(np.zeros(2)), np.zeros(2))


def test_no_warning_for_simple_leading_eigenvalue(piston_ref):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        first_eigenvector(piston_ref.subspace)
