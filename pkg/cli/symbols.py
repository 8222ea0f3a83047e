#!/usr/bin/env python3
"""Sample |g_eta| and |h_xi| on a uniform angle grid, with their tail bounds.

Usage: fidesp symbols [config.json] [--n 256 | --tau 0.004] [--out symbols.csv] [--curves-dir DIR]

h_xi depends on tau = rho * dt; by default dt = T / n with n taken from the
first configured grid (tau = 0 when there is none).
"""
import argparse
import logging
import os
import sys

from cli._common import EXIT_OK, add_common_arguments, load_run_config, run_guarded
from core.coeffs import l1_error_constant
from core.errors import ConfigError
from core.export import write_csv, write_symbol_curve
from core.symbols import space_symbol, time_symbol, uniform_angles

logger = logging.getLogger(__name__)

HEADER = ("theta", "abs_g", "abs_h", "tail_g", "tail_h")


def _tau(args: argparse.Namespace, cfg) -> float:
    if args.tau is not None:
        if args.tau < 0:
            raise ConfigError(f"--tau must be non-negative, got {args.tau}")
        return args.tau
    n = args.n if args.n is not None else (cfg.grids[0][1] if cfg.grids else None)
    if n is None:
        return 0.0
    if n < 1:
        raise ConfigError(f"--n must be positive, got {n}")
    return cfg.problem.rho * cfg.problem.T / n


def _run(args: argparse.Namespace) -> int:
    cfg, _ = load_run_config(args)
    problem, spectra = cfg.problem, cfg.output.spectra
    K = spectra.symbol_truncation
    tau = _tau(args, cfg)
    g = space_symbol(problem.eta, K)
    h = time_symbol(problem.xi, tau, K)
    theta = uniform_angles(spectra.symbol_points)
    g_vals, h_vals = g(theta), h(theta)
    logger.info("symbols: eta=%g xi=%g tau=%.6g K=%d tail_g=%.3e tail_h=%.3e",
                problem.eta, problem.xi, tau, K, g.tail_bound, h.tail_bound)
    logger.info("L1 truncation constants: time %.6g, space %.6g",
                l1_error_constant(problem.xi), l1_error_constant(problem.eta))
    rows = ((t, abs(gv), abs(hv), g.tail_bound, h.tail_bound)
            for t, gv, hv in zip(theta, g_vals, h_vals))
    write_csv(cfg.output.csv, HEADER, rows)
    if args.curves_dir:
        write_symbol_curve(os.path.join(args.curves_dir, "g_eta.csv"), theta, g_vals)
        write_symbol_curve(os.path.join(args.curves_dir, "h_xi.csv"), theta, h_vals)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fidesp symbols",
                                     description="Symbol curves of B_m and U_n.")
    add_common_arguments(parser)
    parser.add_argument("--n", type=int, default=None, help="Time steps used for tau = rho*T/n.")
    parser.add_argument("--tau", type=float, default=None, help="Tempered step, overrides --n.")
    parser.add_argument("--curves-dir", default=None,
                        help="Also write (theta, re, im, abs) curves of both symbols here.")
    args = parser.parse_args(argv)
    return run_guarded(lambda: _run(args), "fidesp symbols")


if __name__ == "__main__":
    sys.exit(main())
