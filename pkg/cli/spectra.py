#!/usr/bin/env python3
"""Dense spectral diagnostics for each configured grid.

Usage: fidesp spectra [config.json] [--out summary.csv] [--values-dir DIR] [--export-dense DIR]

For every (m, n) it reports the eigenvalue cluster of P_N^{-1} A_N, the rank
of A_N - P_N, the eigenvalues of B_m, U_n and G_m, and the singular value
distance of A_N, P_N, B_m and U_n to their symbols. Grids with N above
output.spectra.size_cap are refused (exit status 4). --export-dense writes
A_N and P_N of every grid as whitespace separated text.
"""
import argparse
import os
import sys

from cli._common import EXIT_OK, add_common_arguments, load_run_config, run_guarded
from core.errors import ResourceCapError
from core.export import export_dense, write_csv, write_spectrum
from core.operators import assemble_operator
from core.pipeline import ProblemSpec
from core.precond import BlockTriangularPreconditioner
from core.spectra import (cluster_report, distribution_check_AN, distribution_check_PN,
                          eigen_report, gm_eigen_report, remainder_rank, toeplitz_distribution)
from core.symbols import space_symbol, time_symbol

SUMMARY_HEADER = ("m", "n", "report", "size", "outlier_count", "epsilon", "distance",
                  "threshold", "passed")


def _reports(spec: ProblemSpec, spectra):
    m, n = spec.grid.m, spec.grid.n
    cap, eps = spectra.size_cap, spectra.cluster_eps
    if spec.grid.N > cap:
        raise ResourceCapError(f"grid ({m}, {n}) has N={spec.grid.N} above the dense cap {cap}")
    op = assemble_operator(spec)
    K, threshold = spectra.symbol_truncation, spectra.distance_threshold
    yield cluster_report(op, eps, cap)
    yield eigen_report("B_m", op.Gm.Bm.to_dense(), op.Gm.Bm.first_col[0], eps, limit=cap)
    yield eigen_report("U_n", op.Un.to_dense(), op.Un.first_col[0], eps, limit=cap)
    yield gm_eigen_report(op, eps)
    yield toeplitz_distribution(op.Gm.Bm, space_symbol(spec.params.eta, K), threshold=threshold,
                                label="B_m_sigma", limit=cap)
    yield toeplitz_distribution(op.Un, time_symbol(spec.params.xi, spec.params.rho * spec.grid.dt, K),
                                threshold=threshold, label="U_n_sigma", limit=cap)
    yield distribution_check_AN(m, n, spec, K, threshold, cap)
    yield distribution_check_PN(m, n, spec, K, threshold, cap)


def _run(args: argparse.Namespace) -> int:
    cfg, seed = load_run_config(args)
    spectra = cfg.output.spectra
    problem = cfg.problem
    rows = []
    for m, n in cfg.grids:
        spec = ProblemSpec.from_names(problem.to_params(), m, n, coefficient=problem.coefficient,
                                      coefficient_value=problem.coefficient_value,
                                      time_profile=problem.time_profile, source=problem.source,
                                      initial=problem.initial, seed=seed)
        for report in _reports(spec, spectra):
            rows.append((m, n, report.label, report.size, report.outlier_count, report.epsilon,
                         "" if report.distance is None else report.distance,
                         "" if report.threshold is None else report.threshold,
                         "" if report.passed is None else report.passed))
            if args.values_dir:
                path = os.path.join(args.values_dir, f"{report.label}_m{m}_n{n}.csv")
                write_spectrum(path, report.values, report.reference)
        op = assemble_operator(spec)
        rank = remainder_rank(op, spectra.size_cap)
        rows.append((m, n, "remainder_rank", op.N, rank, "", "", m, rank <= m))
        if args.export_dense:
            export_dense(op.to_dense(), os.path.join(args.export_dense, f"A_N_m{m}_n{n}.txt"))
            export_dense(BlockTriangularPreconditioner.from_operator(op).to_dense(),
                         os.path.join(args.export_dense, f"P_N_m{m}_n{n}.txt"))
    write_csv(cfg.output.csv, SUMMARY_HEADER, rows)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fidesp spectra",
                                     description="Eigenvalue clusters and symbol distributions.")
    add_common_arguments(parser)
    parser.add_argument("--values-dir", default=None,
                        help="Also write the sorted values and symbol samples of every report here.")
    parser.add_argument("--export-dense", default=None, metavar="DIR",
                        help="Write the dense A_N and P_N of every grid here.")
    args = parser.parse_args(argv)
    return run_guarded(lambda: _run(args), "fidesp spectra")


if __name__ == "__main__":
    sys.exit(main())
