"""Command line front end.

Commands::

    gsmetrics refvals  --model piston                 # quadrature reference table
    gsmetrics analyze  --model circuit --samples 50000 --seed 42
    gsmetrics converge --model piston --trials 10     # error / SE study vs M
    gsmetrics summary  --model circuit                # summary-plot data files

Flags may also come from ``--config FILE.json`` whose keys are the RunConfig
field names; explicit flags win over the file. Errors print one line
``error: <tag>: <message>`` on stderr and exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from . import __version__, benchmarks, report
from .active import summary_plot_data
from .analysis import DEFAULT_M_GRID, converge, monte_carlo, reference
from .errors import GSMError, PreconditionError
from .quad import MAX_NODES


@dataclass
class RunConfig:
    model: str = "piston"
    method: str = "quadrature"
    quad_points: int = 7
    mc_samples: int = 50000
    seed: int = 0
    bootstrap_replicates: int = 100
    subspace_dim: Optional[int] = None
    trials: int = 1
    threads: int = 1
    output_dir: str = "results"
    m_grid: list = field(default_factory=lambda: list(DEFAULT_M_GRID))
    summary_samples: int = 500


FLAG_TO_FIELD = {
    "model": "model",
    "samples": "mc_samples",
    "quad_points": "quad_points",
    "seed": "seed",
    "bootstrap": "bootstrap_replicates",
    "dim": "subspace_dim",
    "trials": "trials",
    "threads": "threads",
    "out": "output_dir",
    "m_grid": "m_grid",
    "n_summary": "summary_samples",
}


def _m_grid(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsmetrics", description="Global sensitivity metrics from active subspaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=benchmarks.BENCHMARKS)
    common.add_argument("--samples", type=int, help="Monte Carlo budget M")
    common.add_argument("--quad-points", type=int, help="Gauss-Legendre points per dimension")
    common.add_argument("--seed", type=int)
    common.add_argument("--bootstrap", type=int, help="bootstrap replicates B")
    common.add_argument("--dim", type=int, help="active subspace dimension n (default: largest gap)")
    common.add_argument("--trials", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--m-grid", type=_m_grid, help="comma-separated sample sizes for converge")
    common.add_argument("--n-summary", type=int, help="number of summary-plot samples")

    sub.add_parser("refvals", parents=[common], help="quadrature reference values")
    sub.add_parser("analyze", parents=[common], help="Monte Carlo estimates with bootstrap SEs")
    sub.add_parser("converge", parents=[common], help="Monte Carlo convergence study")
    sub.add_parser("summary", parents=[common], help="summary-plot and ranking data files")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        loaded = json.loads(Path(args.config).read_text())
        known = {f.name for f in fields(RunConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise PreconditionError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for flag, name in FLAG_TO_FIELD.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    values["method"] = "montecarlo" if args.command in ("analyze", "converge") else "quadrature"
    if args.command == "converge" and "trials" not in values:
        values["trials"] = 10
    return RunConfig(**values)


def _check_quadrature_cost(cfg: RunConfig, m: int) -> None:
    nodes = cfg.quad_points**m
    if nodes > MAX_NODES:
        raise PreconditionError(
            f"quadrature with {cfg.quad_points} points in {m} dimensions needs {nodes:.3e} "
            f"model and gradient evaluations (limit {MAX_NODES:.0e})"
        )


def _reference(cfg, spec):
    _check_quadrature_cost(cfg, spec.m)
    ref = reference(spec, cfg.quad_points, n=cfg.subspace_dim, workers=cfg.threads)
    warnings = []
    if cfg.quad_points < 5:
        warnings.append(f"only {cfg.quad_points} quadrature points per dimension; reference values may not be converged")
    return ref, warnings


def cmd_refvals(cfg: RunConfig, out: Path) -> dict:
    spec = benchmarks.build(cfg.model)
    ref, warnings = _reference(cfg, spec)
    rep = report.reference_report(ref, asdict(cfg), warnings)
    report.dump_json(rep, out / f"refvals_{cfg.model}.json")
    table = report.reference_table(ref)
    (out / f"refvals_{cfg.model}.txt").write_text(table)
    sys.stdout.write(table)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return rep


def cmd_analyze(cfg: RunConfig, out: Path) -> dict:
    spec = benchmarks.build(cfg.model)
    if cfg.mc_samples < 2 * (spec.m + 1):
        raise PreconditionError(
            f"--samples {cfg.mc_samples} leaves fewer than 2 samples per Jansen matrix; need >= {2 * (spec.m + 1)}"
        )
    run = monte_carlo(spec, cfg.mc_samples, cfg.seed, cfg.bootstrap_replicates, n=cfg.subspace_dim, threads=cfg.threads)
    rep = report.monte_carlo_report(run, asdict(cfg))
    report.dump_json(rep, out / f"analyze_{cfg.model}.json")
    for metric, block in rep["metrics"].items():
        cells = ", ".join(
            f"{name}={v:.4f}({se:.1e})"
            for name, v, se in zip(block["parameters"], block["values"], block["standard_errors"])
        )
        print(f"{metric}: {cells}")
    return rep


def cmd_converge(cfg: RunConfig, out: Path):
    spec = benchmarks.build(cfg.model)
    ref, _ = _reference(cfg, spec)
    study = converge(spec, ref, cfg.m_grid, cfg.trials, cfg.seed, cfg.bootstrap_replicates, cfg.threads)
    report.write_convergence(study, out / f"converge_{cfg.model}.csv", out / f"converge_{cfg.model}_slopes.csv")
    for metric, s in study.slopes().items():
        fmt = lambda v: "n/a" if v is None else f"{v:+.3f}"  # noqa: E731
        print(f"{metric}: error slope {fmt(s['rel_error'])}, std error slope {fmt(s['std_error'])}")
    return study


def cmd_summary(cfg: RunConfig, out: Path):
    spec = benchmarks.build(cfg.model)
    ref, _ = _reference(cfg, spec)
    rows = summary_plot_data(spec, ref.subspace, cfg.summary_samples, cfg.seed)
    paths = report.write_summary(spec, ref, rows, out, f"summary_{cfg.model}")
    for p in paths:
        print(p)
    return paths


COMMANDS = {"refvals": cmd_refvals, "analyze": cmd_analyze, "converge": cmd_converge, "summary": cmd_summary}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out)
    except GSMError as err:
        msg = " ".join(str(err).split())
        print(f"error: {err.tag}: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
