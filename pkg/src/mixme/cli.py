"""Command-line entry point: ``mixme <subcommand> ...``.

Subcommands:

* ``run``            run MAP-Elites from a config file and write artifacts
* ``grid-search``    tune the variation hyperparameters over a search space
* ``eval-adapt``     generalisation sweep of a saved run under modified envs
* ``export-heatmap`` write an archive as one CSV row per occupied cell
* ``oracle-check``   compare archive insertion with a brute-force arm oracle
* ``reachable-cells`` record the gait cells hit by random search
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from mixme.config import ConfigError, RunConfig, load_config
from mixme.harness import Scenario, generalisation_sweep, grid_search, run_map_elites
from mixme.persistence import (
    ARCHIVE_FILE,
    GRID_MEANS_HEADER,
    GRID_SEARCH_HEADER,
    SWEEP_HEADER,
    ArchiveFormatError,
    load_archive,
    load_run,
    save_run,
    write_csv,
    write_heatmap_csv,
    write_json,
)
from mixme.variation import Variant


class CliError(Exception):
    pass


def _base_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.variant is not None:
        overrides["variant"] = Variant(args.variant)
    if getattr(args, "iterations", None) is not None:
        overrides["n_iterations"] = args.iterations
    if getattr(args, "batch_size", None) is not None:
        overrides["batch_size"] = args.batch_size
    return replace(config, **overrides) if overrides else config


def _out_dir(args: argparse.Namespace) -> Path:
    if args.out is None:
        raise CliError("--out DIR is required")
    return Path(args.out)


def cmd_run(args: argparse.Namespace) -> int:
    config = _base_config(args)
    out = _out_dir(args)
    env = config.build_env()
    artifacts = run_map_elites(config, env=env)
    save_run(out, artifacts, env.agent_specs())
    final = artifacts.metrics[-1]
    print(
        f"iterations={final.iteration} evaluations={final.env_interactions} "
        f"max_fitness={final.max_fitness!r} coverage={final.coverage!r} qd_score={final.qd_score!r}"
    )
    return 0


def cmd_grid_search(args: argparse.Namespace) -> int:
    base = _base_config(args)
    out = _out_dir(args)
    result = grid_search(base)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "grid_search.csv", GRID_SEARCH_HEADER, ((r.sigma_iso, r.sigma_line, r.eta, r.seed, r.qd_score) for r in result.rows))
    write_csv(out / "grid_search_means.csv", GRID_MEANS_HEADER, result.means)
    b = result.best
    write_json(out / "best.json", {"sigma_iso": b.sigma_iso, "sigma_line": b.sigma_line, "eta": b.eta, "mean_qd_score": result.best_mean_qd})
    print(f"best sigma_iso={b.sigma_iso!r} sigma_line={b.sigma_line!r} eta={b.eta!r} mean_qd_score={result.best_mean_qd!r}")
    return 0


def cmd_eval_adapt(args: argparse.Namespace) -> int:
    config, archive, _ = load_run(args.run)
    if len(archive) == 0:
        raise CliError("the saved archive is empty")
    env = config.build_env()
    sweeps = []
    explicit = args.gravity_mult is not None or args.dysfunction_coef is not None
    if args.gravity_mult is not None or not explicit:
        sweeps.append((Scenario.GRAVITY, args.gravity_mult))
    if args.dysfunction_coef is not None or not explicit:
        sweeps.append((Scenario.DYSFUNCTION, args.dysfunction_coef))
    rows = []
    for scenario, values in sweeps:
        table = generalisation_sweep(config, archive, scenario, values, args.dysfunction_leg, args.n_evals, env)
        rows.extend((scenario.value, v, f) for v, f in table)
    training = archive.compute_metrics().max_fitness
    print(f"training_max_fitness={training!r}")
    for scenario, v, f in rows:
        print(f"{scenario} value={v!r} adapted_best_fitness={f!r}")
    if args.out:
        write_csv(args.out, SWEEP_HEADER, rows)
    return 0


def cmd_export_heatmap(args: argparse.Namespace) -> int:
    path = Path(args.archive)
    if path.is_dir():
        path = path / ARCHIVE_FILE
    archive, _ = load_archive(path)
    if args.out is None:
        raise CliError("--out FILE is required")
    write_heatmap_csv(args.out, archive)
    print(f"wrote {len(archive)} cells to {args.out}")
    return 0


def cmd_oracle_check(args: argparse.Namespace) -> int:
    from mixme.oracle import arm_enumeration_check

    report = arm_enumeration_check(args.values, args.cells)
    if report.ok:
        print(f"oracle-check passed: {report.n_genomes} genomes, {report.n_cells} cells match the brute-force argmax")
        return 0
    for line in report.mismatches:
        print(line, file=sys.stderr)
    print(f"oracle-check FAILED: {len(report.mismatches)} mismatching cells", file=sys.stderr)
    return 1


def cmd_reachable_cells(args: argparse.Namespace) -> int:
    from mixme.oracle import random_search_cells

    config = load_config(args.config) if args.config else RunConfig()
    if config.env.name != "gait" or not isinstance(config.grid.cells_per_dim, int):
        raise CliError("reachable-cells needs the gait environment and a uniform grid")
    env = replace(config, variant=Variant.MIX_ME).build_env()
    cells = random_search_cells(env, args.n_evals, args.seed or 0, cells_per_dim=config.grid.cells_per_dim)
    doc = {"n_legs": env.n_legs, "cells_per_dim": config.grid.cells_per_dim, "n_evals": args.n_evals,
           "seed": args.seed or 0, "cells": sorted(list(c) for c in cells)}
    if args.out is None:
        raise CliError("--out FILE is required")
    Path(args.out).write_text(json.dumps(doc) + "\n")
    print(f"{len(cells)} reachable cells")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixme", description="MAP-Elites and Mix-ME for multi-agent policies.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="TOML run configuration")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--variant", choices=[v.value for v in Variant], help="algorithm variant (overrides the config)")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--iterations", type=int, help="number of iterations (overrides the config)")
        p.add_argument("--batch-size", type=int, help="offspring per iteration (overrides the config)")

    p = sub.add_parser("run", help="run MAP-Elites and write artifacts")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("grid-search", help="grid search over variation hyperparameters")
    common(p)
    p.set_defaults(func=cmd_grid_search)

    p = sub.add_parser("eval-adapt", help="evaluate a saved archive under modified environments")
    p.add_argument("--run", metavar="DIR", required=True, help="directory written by 'run'")
    p.add_argument("--gravity-mult", type=float, nargs="+", metavar="FLOAT", help="gravity multipliers to test")
    p.add_argument("--dysfunction-leg", type=int, metavar="INT", help="index of the impaired leg")
    p.add_argument("--dysfunction-coef", type=float, nargs="+", metavar="FLOAT", help="torque coefficients to test")
    p.add_argument("--n-evals", type=int, metavar="N", help="episodes per elite (median is taken)")
    p.add_argument("--out", metavar="FILE", help="CSV output file")
    p.set_defaults(func=cmd_eval_adapt)

    p = sub.add_parser("export-heatmap", help="archive to CSV, one row per occupied cell")
    p.add_argument("--archive", metavar="PATH", required=True, help="archive JSON or run directory")
    p.add_argument("--out", metavar="FILE", required=True, help="CSV output file")
    p.set_defaults(func=cmd_export_heatmap)

    p = sub.add_parser("oracle-check", help="brute-force check of archive insertion on the arm task")
    p.add_argument("--values", type=int, default=11, help="angle values per joint")
    p.add_argument("--cells", type=int, default=5, help="grid cells per axis")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("reachable-cells", help="gait cells reached by random search")
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-evals", type=int, default=1_000_000)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_reachable_cells)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ArchiveFormatError, CliError, ValueError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
