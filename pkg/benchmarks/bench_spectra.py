"""
Spectral benchmark: eigenvalue clustering of P_N^{-1} A_N and the
singular value distribution of B_m against |g_eta|.

  cluster:      (m, n) in {4, 8, 16, 32}^2, at least N - m eigenvalues
                within 1e-8 of 1 and at most m outliers
  distribution: m in {64, 128, 256, 512}, quantile sup-distance to |g_eta|
                non-increasing up to 10 % and below 0.1 at the largest m

Usage:
    python3 benchmarks/bench_spectra.py [--eta 0.5] [--truncation 10000]
"""
import argparse
import logging
import os
import sys
import time

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir)))

import numpy as np

from core.operators import assemble_operator
from core.params import FractionalParams
from core.pipeline import ProblemSpec
from core.spectra import cluster_report, toeplitz_distribution
from core.symbols import space_symbol

CLUSTER_SIZES = (4, 8, 16, 32)
DISTRIBUTION_SIZES = (64, 128, 256, 512)
CLUSTER_EPS = 1e-8
DISTANCE_LIMIT = 0.1
MONOTONE_SLACK = 0.10


def _cluster(params: FractionalParams) -> list[str]:
    failures = []
    print(f"{'m':>4} {'n':>4} {'N':>6} {'near 1':>7} {'outliers':>9} {'ms':>8}")
    for m in CLUSTER_SIZES:
        for n in CLUSTER_SIZES:
            op = assemble_operator(ProblemSpec.from_names(params, m, n))
            t0 = time.perf_counter()
            report = cluster_report(op, CLUSTER_EPS)
            ms = (time.perf_counter() - t0) * 1000
            near = int(np.count_nonzero(np.abs(report.values - 1.0) < CLUSTER_EPS))
            print(f"{m:>4} {n:>4} {op.N:>6} {near:>7} {report.outlier_count:>9} {ms:>8.1f}")
            if near < op.N - m or report.outlier_count > m:
                failures.append(f"cluster m={m} n={n}: {near} near 1, {report.outlier_count} outliers")
    return failures


def _distribution(eta: float, truncation: int) -> list[str]:
    failures = []
    symbol = space_symbol(eta, truncation)
    params = FractionalParams(0.5, eta)
    distances = []
    print(f"\n{'m':>5} {'distance':>10}")
    for m in DISTRIBUTION_SIZES:
        op = assemble_operator(ProblemSpec.from_names(params, m, 1))
        report = toeplitz_distribution(op.Gm.Bm, symbol, threshold=DISTANCE_LIMIT, label="B_m")
        distances.append(report.distance)
        print(f"{m:>5} {report.distance:>10.4f}")
    for (m0, d0), (m1, d1) in zip(zip(DISTRIBUTION_SIZES, distances),
                                  zip(DISTRIBUTION_SIZES[1:], distances[1:])):
        if d1 > d0 * (1.0 + MONOTONE_SLACK):
            failures.append(f"distribution grew from {d0:.4f} (m={m0}) to {d1:.4f} (m={m1})")
    if distances[-1] > DISTANCE_LIMIT:
        failures.append(f"distribution at m={DISTRIBUTION_SIZES[-1]}: {distances[-1]:.4f} "
                        f"> {DISTANCE_LIMIT}")
    return failures


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--eta", type=float, default=0.5)
    parser.add_argument("--xi", type=float, default=0.5)
    parser.add_argument("--truncation", type=int, default=10_000)
    args = parser.parse_args()

    logging.basicConfig(level=logging.WARNING,
                        format="%(asctime)s [%(levelname)s] %(name)s - %(message)s")

    failures = _cluster(FractionalParams(args.xi, args.eta))
    failures += _distribution(args.eta, args.truncation)
    print()
    if failures:
        for line in failures:
            print(f"  FAIL {line}")
        return 1
    print("All spectral checks passed.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
