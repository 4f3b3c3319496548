import csv
import json

import pytest

from gsmetrics import __version__
from gsmetrics.cli import main

REPORT_KEYS = {"config", "model", "metrics", "eigenvalues", "subspace_dim", "theorem_checks", "rankings", "version"}
METRICS = ("tsi", "dgsm", "linear_coeff", "eigvec1", "activity_score")


def run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_refvals_report(tmp_path, capsys):
    assert run(tmp_path, "refvals", "--model", "circuit") == 0
    rep = json.loads((tmp_path / "refvals_circuit.json").read_text())
    assert REPORT_KEYS <= set(rep)
    assert rep["version"] == __version__
    for metric in METRICS:
        block = rep["metrics"][metric]
        assert block["parameters"] == ["Rb1", "Rb2", "Rf", "Rc1", "Rc2", "beta"]
        assert len(block["values"]) == 6 and block["evaluations"] == 7**6
    assert rep["subspace_dim"] == 1 and rep["theorem_checks"]["theorem1"]["holds"]
    out = capsys.readouterr().out
    assert out.splitlines()[0].split() == ["Parameter", "tau", "nu", "beta", "w1", "alpha(1)"]
    assert (tmp_path / "refvals_circuit.txt").read_text() == out


def test_json_round_trip(tmp_path):
    run(tmp_path, "refvals", "--model", "circuit", "--quad-points", "4")
    text = (tmp_path / "refvals_circuit.json").read_text()
    assert json.dumps(json.loads(text), indent=2) + "\n" == text


def test_low_point_count_warns(tmp_path, capsys):
    assert run(tmp_path, "refvals", "--model", "piston", "--quad-points", "2") == 0
    rep = json.loads((tmp_path / "refvals_piston.json").read_text())
    assert rep["warnings"] and "warning:" in capsys.readouterr().err


def test_quadrature_cost_refusal(tmp_path, capsys):
    assert run(tmp_path, "refvals", "--model", "piston", "--quad-points", "20") == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: precondition_error:")
    assert "1.280e+09" in err[0]


def test_analyze_too_few_samples(tmp_path, capsys):
    assert run(tmp_path, "analyze", "--model", "piston", "--samples", "10") == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: precondition_error:")


def test_analyze_deterministic_and_thread_independent(tmp_path):
    args = ["analyze", "--model", "piston", "--samples", "2000", "--seed", "5", "--bootstrap", "20"]
    out = tmp_path / "analyze_piston.json"
    assert run(tmp_path, *args, "--threads", "1") == 0
    first = out.read_bytes()
    assert run(tmp_path, *args, "--threads", "1") == 0
    assert out.read_bytes() == first
    assert run(tmp_path, *args, "--threads", "3") == 0
    assert json.loads(out.read_text())["metrics"] == json.loads(first)["metrics"]


def test_analyze_report_contents(tmp_path):
    assert run(tmp_path, "analyze", "--model", "piston", "--samples", "800", "--bootstrap", "10") == 0
    rep = json.loads((tmp_path / "analyze_piston.json").read_text())
    assert REPORT_KEYS <= set(rep)
    assert rep["metrics"]["tsi"]["evaluations"] == 800 // 8 * 8
    for metric in ("dgsm", "linear_coeff", "eigvec1", "activity_score"):
        assert rep["metrics"][metric]["evaluations"] == 800
    assert all(se >= 0 for m in METRICS for se in rep["metrics"][m]["standard_errors"])
    assert len(rep["metrics"]["dgsm"]["formula_standard_errors"]) == 7


def test_analyze_circuit_total_index(tmp_path):
    assert run(tmp_path, "analyze", "--model", "circuit", "--samples", "50000", "--seed", "42") == 0
    block = json.loads((tmp_path / "analyze_circuit.json").read_text())["metrics"]["tsi"]
    assert abs(block["values"][0] - 0.5001) <= 3 * block["standard_errors"][0]


def test_converge_single_entry_grid(tmp_path):
    assert run(tmp_path, "converge", "--model", "circuit", "--m-grid", "300",
               "--trials", "2", "--bootstrap", "10", "--quad-points", "4") == 0
    rows = read_csv(tmp_path / "converge_circuit.csv")
    assert rows[0][:5] == ["metric", "parameter", "M", "rel_error", "std_error"]
    assert len(rows) == 1 + 5 * 6
    assert {r[2] for r in rows[1:]} == {"300"}
    slopes = read_csv(tmp_path / "converge_circuit_slopes.csv")
    assert slopes[0] == ["metric", "rel_error_slope", "std_error_slope"]
    assert all(r[1] == "" and r[2] == "" for r in slopes[1:])


def test_converge_csv_full_precision(tmp_path):
    assert run(tmp_path, "converge", "--model", "circuit", "--m-grid", "100,400",
               "--trials", "2", "--bootstrap", "10", "--quad-points", "4") == 0
    rows = read_csv(tmp_path / "converge_circuit.csv")
    assert len(rows) == 1 + 5 * 6 * 2
    for r in rows[1:]:
        for cell in r[3:]:
            assert cell == format(float(cell), ".17g")
    slopes = read_csv(tmp_path / "converge_circuit_slopes.csv")
    assert all(r[1] and r[2] for r in slopes[1:])


def test_summary_files(tmp_path):
    assert run(tmp_path, "summary", "--model", "piston", "--n-summary", "50") == 0
    samples = read_csv(tmp_path / "summary_piston_samples.csv")
    assert samples[0] == ["av1", "av2", "f"] and len(samples) == 51
    eig = read_csv(tmp_path / "summary_piston_eigenvalues.csv")
    assert eig[0] == ["index", "eigenvalue"] and len(eig) == 8
    scores = {r[0]: [float(v) for v in r[1:]] for r in read_csv(tmp_path / "summary_piston_activity_scores.csv")[1:]}
    # M outranks k at n = 1, k outranks M at n = 2
    assert scores["M"][0] > scores["k"][0] and scores["k"][1] > scores["M"][1]


def test_summary_circuit_rankings_agree(tmp_path):
    assert run(tmp_path, "summary", "--model", "circuit") == 0
    rows = read_csv(tmp_path / "summary_circuit_rankings.csv")
    header = rows[0]
    rank_cols = [i for i, h in enumerate(header) if h.endswith("_rank")]
    assert len(rank_cols) == 5
    for r in rows[1:]:
        assert len({r[i] for i in rank_cols}) == 1


def test_summary_zero_samples(tmp_path):
    assert run(tmp_path, "summary", "--model", "circuit", "--n-summary", "0") == 0
    assert read_csv(tmp_path / "summary_circuit_samples.csv") == [["av1", "av2", "f"]]
    for suffix in ("eigenvalues", "activity_scores", "rankings"):
        assert (tmp_path / f"summary_circuit_{suffix}.csv").exists()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"model": "circuit", "quad_points": 3, "seed": 9}))
    assert run(tmp_path, "refvals", "--config", str(cfg), "--quad-points", "4") == 0
    rep = json.loads((tmp_path / "refvals_circuit.json").read_text())
    assert rep["config"]["quad_points"] == 4 and rep["config"]["seed"] == 9


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"modle": "piston"}))
    assert run(tmp_path, "refvals", "--config", str(cfg)) == 2
    assert "error: precondition_error:" in capsys.readouterr().err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0 and __version__ in capsys.readouterr().out
