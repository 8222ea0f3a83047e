"""
GMRES iteration table benchmark against the published counts.

Runs every (m, n) grid with m, n in 2^lo..2^hi for the three standard order
pairs, without preconditioning and with P_N, and compares each count with
REFERENCE_ITERATIONS:

  P_N              within max(3 iterations, 10 %)
  unpreconditioned within 15 %

It also checks the qualitative shape of the table: for fixed m the P_N count
varies by at most 3 across n, and it grows sublinearly in m. P_N is applied on
the left unless --side right is given.

Usage:
    python3 benchmarks/bench_table1.py [--min-exponent 4] [--max-exponent 6] [--jobs 4] [--side left]

Exit status 1 when any cell falls outside its tolerance.
"""
import argparse
import logging
import os
import sys
import time
from statistics import mean, median

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir)))

from core.experiments import (REFERENCE_ITERATIONS, TABLE1_ORDERS, ExperimentRunner,
                              format_table1, reference_deviations, table1_cells,
                              table1_shape_failures)
from core.krylov import GmresOptions
from core.memory_budget import MemoryBudget
from core.params import FractionalParams


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--min-exponent", type=int, default=4)
    parser.add_argument("--max-exponent", type=int, default=6)
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--mem-budget-mb", type=int, default=2048)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--side", choices=("left", "right"), default="left")
    args = parser.parse_args()

    logging.basicConfig(level=logging.WARNING,
                        format="%(asctime)s [%(levelname)s] %(name)s - %(message)s")

    sizes = [2 ** e for e in range(args.min_exponent, args.max_exponent + 1)]
    opts = GmresOptions(tol=1e-8, side=args.side)
    runner = ExperimentRunner(FractionalParams(0.5, 0.5), opts=opts, seed=args.seed,
                              budget=MemoryBudget(args.mem_budget_mb, args.jobs), jobs=args.jobs)
    cells = table1_cells(runner, sizes)

    print(f"Running {len(cells)} cells on {args.jobs} worker(s) ...")
    t0 = time.perf_counter()
    outcome = runner.run(cells)
    elapsed = time.perf_counter() - t0

    print()
    print(format_table1(outcome.results, TABLE1_ORDERS, REFERENCE_ITERATIONS))
    print()
    times = [r.wall_time_s for r in outcome.results]
    if times:
        print(f"  cells:      {len(times)}  "
              f"(refused {len(outcome.refused)}, failed {len(outcome.failed)})")
        print(f"  total:      {elapsed:.1f} s")
        print(f"  per cell:   mean {mean(times):.2f} s   median {median(times):.2f} s   "
              f"max {max(times):.2f} s")

    failures = (reference_deviations(outcome.results)
                + table1_shape_failures(outcome.results, sizes))
    for cell, reason in outcome.refused:
        failures.append(f"m={cell.m} n={cell.n} {cell.precond.value}: refused ({reason})")
    for cell, reason in outcome.failed:
        failures.append(f"m={cell.m} n={cell.n} {cell.precond.value}: failed ({reason})")
    print()
    if failures:
        print(f"{len(failures)} check(s) outside tolerance:")
        for line in failures:
            print(f"  {line}")
        return 1
    print("All cells within tolerance.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
