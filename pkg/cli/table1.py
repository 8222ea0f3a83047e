#!/usr/bin/env python3
"""Reproduce the GMRES iteration table for the three standard order pairs.

Usage: fidesp table1 [config.json] [--max-exponent 6] [--compare] [--out table.csv]

Grids are all (2^i, 2^j) with i, j between --min-exponent and --max-exponent;
the order pairs are (0.2, 0.8), (0.5, 0.5) and (0.8, 0.2). P_N is applied on
the left and GMRES stops on the preconditioned residual unless --side right
is given. Every other problem and solver setting comes from the config.
Cells the memory budget refuses show as '-' and make the command exit with
status 4; numerical failures show as '-' too and give status 3.
"""
import argparse
import sys

from cli._common import (add_common_arguments, build_runner, load_run_config, outcome_status,
                         run_guarded)
from core.errors import ConfigError
from core.experiments import (CSV_HEADER, REFERENCE_ITERATIONS, TABLE1_ORDERS, format_table1,
                              table1_cells)
from core.export import write_csv


def _run(args: argparse.Namespace) -> int:
    if not 1 <= args.min_exponent <= args.max_exponent:
        raise ConfigError(f"need 1 <= --min-exponent <= --max-exponent, got "
                          f"{args.min_exponent}..{args.max_exponent}")
    cfg, seed = load_run_config(args)
    runner = build_runner(cfg, seed, args.side)
    sizes = [2 ** e for e in range(args.min_exponent, args.max_exponent + 1)]
    outcome = runner.run(table1_cells(runner, sizes))
    print(format_table1(outcome.results, TABLE1_ORDERS,
                        REFERENCE_ITERATIONS if args.compare else None))
    if cfg.output.csv is not None:
        write_csv(cfg.output.csv, CSV_HEADER, outcome.rows())
    return outcome_status(outcome, "fidesp table1")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fidesp table1",
                                     description="GMRES iteration counts without and with P_N.")
    add_common_arguments(parser)
    parser.add_argument("--min-exponent", type=int, default=4, help="Smallest grid 2^k (default 4).")
    parser.add_argument("--max-exponent", type=int, default=8, help="Largest grid 2^k (default 8).")
    parser.add_argument("--compare", action="store_true",
                        help="Print the published counts next to the measured ones.")
    parser.add_argument("--side", choices=("left", "right"), default="left",
                        help="Preconditioner side for the P_N column (default left).")
    args = parser.parse_args(argv)
    return run_guarded(lambda: _run(args), "fidesp table1")


if __name__ == "__main__":
    sys.exit(main())
