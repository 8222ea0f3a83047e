#!/usr/bin/env python3
"""Run the experiment matrix of a config and write one CSV row per cell.

Usage: fidesp run [config.json] [--seed N] [--out results.csv] [--residuals-dir DIR]
                  [--mem-budget-mb MB] [--jobs J]

Each (m, n) grid is run once per preconditioner choice ("both" = none and PN).
Non-converged cells still produce a row (converged=false). Cells refused by
the memory budget are left out and the command exits with status 4; cells
that hit a zero pivot or an Arnoldi breakdown are left out with status 3.
With --residuals-dir every cell also gets its GMRES residual history.
"""
import argparse
import os
import sys

from cli._common import (add_common_arguments, build_runner, load_run_config, outcome_status,
                         run_guarded)
from core.experiments import CSV_HEADER, CellResult, expand_preconditioners
from core.export import write_csv, write_residual_history


def residual_path(directory: str, res: CellResult) -> str:
    c = res.cell
    return os.path.join(directory, f"residuals_m{c.m}_n{c.n}_xi{c.xi:g}_eta{c.eta:g}_"
                                   f"{c.precond.value}.csv")


def _run(args: argparse.Namespace) -> int:
    cfg, seed = load_run_config(args)
    runner = build_runner(cfg, seed)
    cells = runner.cells(cfg.grids, expand_preconditioners(cfg.solver.preconditioner))
    outcome = runner.run(cells)
    write_csv(cfg.output.csv, CSV_HEADER, outcome.rows())
    if args.residuals_dir:
        for res in outcome.results:
            write_residual_history(residual_path(args.residuals_dir, res), res.residual_history)
    return outcome_status(outcome, "fidesp run")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fidesp run",
                                     description="Solve the inverse source problem for each configured grid.")
    add_common_arguments(parser)
    parser.add_argument("--residuals-dir", default=None,
                        help="Write the relative residual history of every cell here.")
    args = parser.parse_args(argv)
    return run_guarded(lambda: _run(args), "fidesp run")


if __name__ == "__main__":
    sys.exit(main())
