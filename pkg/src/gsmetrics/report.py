"""JSON reports, plot-ready CSV files and the aligned text table."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, active
from .analysis import ConvergenceStudy, MonteCarloRun, Reference
from .mc import METRICS

METRIC_LABELS = {
    "tsi": "tau",
    "dgsm": "nu",
    "linear_coeff": "beta",
    "eigvec1": "w1",
    "activity_score": "alpha(n)",
}


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _fmt(v) -> str:
    # 17 significant digits round-trip any double
    return "" if v is None else format(float(v), ".17g")


def model_block(spec) -> dict:
    return {
        "name": spec.name,
        "parameters": [
            {"name": p.name, "min": p.min, "max": p.max, "units": p.units} for p in spec.parameters
        ],
    }


def rankings_block(spec, values: dict[str, np.ndarray]) -> dict:
    names = spec.names
    return {
        metric: {
            "normalized": _floats(active.normalize_metric(values[metric])),
            "order": [names[i] for i in active.ranking(values[metric])],
        }
        for metric in METRICS
    }


def reference_report(ref: Reference, config: dict, warnings: Optional[list[str]] = None) -> dict:
    spec = ref.spec
    checks = active.theorem_checks(ref.subspace, ref.values["dgsm"], ref.values["tsi"], ref.variance)
    metrics = {
        metric: {
            "parameters": spec.names,
            "values": _floats(ref.values[metric]),
            "standard_errors": None,
            "evaluations": ref.evaluations,
            "source": "quadrature",
        }
        for metric in METRICS
    }
    metrics["activity_score"]["n"] = ref.n
    return {
        "config": config,
        "model": model_block(spec),
        "metrics": metrics,
        "eigenvalues": _floats(ref.subspace.eigenvalues),
        "subspace_dim": ref.n,
        "theorem_checks": checks,
        "rankings": rankings_block(spec, ref.values),
        "moments": {"mean": ref.mean, "variance": ref.variance},
        "warnings": list(warnings or []),
        "version": __version__,
    }


def monte_carlo_report(run: MonteCarloRun, config: dict) -> dict:
    spec = run.spec
    metrics = {}
    for metric in METRICS:
        est = run.estimates[metric]
        block = {
            "parameters": spec.names,
            "values": _floats(est.values),
            "standard_errors": _floats(est.standard_errors),
            "evaluations": int(est.evaluations_used),
            "seed": int(est.seed),
            "source": "monte_carlo",
        }
        if metric == "dgsm":
            block["formula_standard_errors"] = _floats(est.extras["formula_standard_errors"])
        if metric == "linear_coeff":
            block["intercept"] = float(est.extras["intercept"])
        if metric == "activity_score":
            block["n"] = run.n
        metrics[metric] = block
    values = {metric: run.estimates[metric].values for metric in METRICS}
    return {
        "config": config,
        "model": model_block(spec),
        "metrics": metrics,
        "eigenvalues": _floats(run.subspace.eigenvalues),
        "subspace_dim": run.n,
        "theorem_checks": None,
        "rankings": rankings_block(spec, values),
        "warnings": [],
        "version": __version__,
    }


def dump_json(report: dict, path: Path) -> None:
    path.write_text(json.dumps(report, indent=2, allow_nan=False) + "\n")


def reference_table(ref: Reference) -> str:
    """Aligned text table, one row per parameter, four decimals."""
    cols = [METRIC_LABELS[m].replace("(n)", f"({ref.n})") for m in METRICS]
    width = max(9, max(len(n) for n in ref.spec.names) + 1)
    lines = ["Parameter".ljust(width) + "".join(c.rjust(10) for c in cols)]
    lines.append("-" * len(lines[0]))
    for i, name in enumerate(ref.spec.names):
        row = "".join(f"{ref.values[m][i]:10.4f}" for m in METRICS)
        lines.append(name.ljust(width) + row)
    return "\n".join(lines) + "\n"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def write_convergence(study: ConvergenceStudy, path: Path, slopes_path: Path) -> None:
    names = study.spec.names
    ref = study.reference.values
    rows = []
    for metric in METRICS:
        for i, name in enumerate(names):
            for j, M in enumerate(study.Ms):
                rows.append([
                    metric, name, M,
                    _fmt(study.rel_error[metric][j, i]),
                    _fmt(study.std_error[metric][j, i]),
                    _fmt(study.mean_estimate[metric][j, i]),
                    _fmt(study.mean_raw_se[metric][j, i]),
                    _fmt(ref[metric][i]),
                ])
    _write_csv(
        path,
        ["metric", "parameter", "M", "rel_error", "std_error", "mean_estimate", "mean_raw_std_error", "reference"],
        rows,
    )
    slopes = study.slopes()
    _write_csv(
        slopes_path,
        ["metric", "rel_error_slope", "std_error_slope"],
        [[m, _fmt(slopes[m]["rel_error"]), _fmt(slopes[m]["std_error"])] for m in METRICS],
    )


def write_summary(spec, ref: Reference, samples: np.ndarray, out: Path, prefix: str) -> list[Path]:
    paths = [out / f"{prefix}_samples.csv", out / f"{prefix}_eigenvalues.csv",
             out / f"{prefix}_activity_scores.csv", out / f"{prefix}_rankings.csv"]
    _write_csv(paths[0], ["av1", "av2", "f"], [[_fmt(v) for v in row] for row in samples])
    _write_csv(paths[1], ["index", "eigenvalue"],
               [[j + 1, _fmt(v)] for j, v in enumerate(ref.subspace.eigenvalues)])
    table = active.activity_score_table(ref.subspace)
    _write_csv(paths[2], ["parameter"] + [f"n{n}" for n in range(1, spec.m + 1)],
               [[name] + [_fmt(v) for v in table[i]] for i, name in enumerate(spec.names)])
    norm = {m: active.normalize_metric(ref.values[m]) for m in METRICS}
    ranks = {m: np.argsort(active.ranking(ref.values[m])) + 1 for m in METRICS}
    header = ["parameter"] + [f"{m}_normalized" for m in METRICS] + [f"{m}_rank" for m in METRICS]
    _write_csv(paths[3], header, [
        [name] + [_fmt(norm[m][i]) for m in METRICS] + [int(ranks[m][i]) for m in METRICS]
        for i, name in enumerate(spec.names)
    ])
    return paths
