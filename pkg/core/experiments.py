"""Experiment matrix: one cell per (grid, orders, preconditioner), run on a
thread pool, collected into deterministically ordered CSV rows.
"""
import dataclasses
import logging
import statistics
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from core.errors import BreakdownError, ResourceCapError, SingularityError
from core.krylov import GmresOptions
from core.memory_budget import MemoryBudget
from core.params import FractionalParams, PreconditionerKind
from core.pipeline import ProblemSpec, run_experiment

logger = logging.getLogger(__name__)

CSV_HEADER = ("m", "n", "xi", "eta", "rho", "lambda", "epsilon", "seed", "precond",
              "iterations", "converged", "final_relres", "rel_error_f", "wall_time_s")

TABLE1_ORDERS = ((0.2, 0.8), (0.5, 0.5), (0.8, 0.2))
TABLE1_SIZES = (16, 32, 64, 128, 256)

# Published (unpreconditioned, P_N) GMRES iteration counts, keyed by (m, n)
# and then by (xi, eta).
REFERENCE_ITERATIONS: dict[tuple[int, int], dict[tuple[float, float], tuple[int, int]]] = {
    (16, 16): {(0.2, 0.8): (66, 15), (0.5, 0.5): (53, 17), (0.8, 0.2): (45, 16)},
    (16, 32): {(0.2, 0.8): (62, 16), (0.5, 0.5): (60, 17), (0.8, 0.2): (63, 16)},
    (16, 64): {(0.2, 0.8): (64, 17), (0.5, 0.5): (67, 17), (0.8, 0.2): (86, 17)},
    (16, 128): {(0.2, 0.8): (61, 17), (0.5, 0.5): (67, 17), (0.8, 0.2): (141, 17)},
    (16, 256): {(0.2, 0.8): (61, 17), (0.5, 0.5): (79, 17), (0.8, 0.2): (230, 16)},
    (32, 16): {(0.2, 0.8): (107, 26), (0.5, 0.5): (75, 30), (0.8, 0.2): (49, 28)},
    (32, 32): {(0.2, 0.8): (110, 27), (0.5, 0.5): (79, 29), (0.8, 0.2): (68, 27)},
    (32, 64): {(0.2, 0.8): (110, 27), (0.5, 0.5): (86, 29), (0.8, 0.2): (90, 27)},
    (32, 128): {(0.2, 0.8): (103, 27), (0.5, 0.5): (89, 29), (0.8, 0.2): (142, 27)},
    (32, 256): {(0.2, 0.8): (100, 27), (0.5, 0.5): (96, 30), (0.8, 0.2): (230, 28)},
    (64, 16): {(0.2, 0.8): (213, 36), (0.5, 0.5): (101, 49), (0.8, 0.2): (51, 40)},
    (64, 32): {(0.2, 0.8): (211, 35), (0.5, 0.5): (103, 48), (0.8, 0.2): (71, 39)},
    (64, 64): {(0.2, 0.8): (207, 36), (0.5, 0.5): (110, 47), (0.8, 0.2): (94, 39)},
    (64, 128): {(0.2, 0.8): (193, 37), (0.5, 0.5): (109, 48), (0.8, 0.2): (145, 41)},
    (64, 256): {(0.2, 0.8): (194, 36), (0.5, 0.5): (117, 49), (0.8, 0.2): (231, 40)},
    (128, 16): {(0.2, 0.8): (503, 46), (0.5, 0.5): (136, 71), (0.8, 0.2): (56, 57)},
    (128, 32): {(0.2, 0.8): (493, 46), (0.5, 0.5): (136, 71), (0.8, 0.2): (76, 56)},
    (128, 64): {(0.2, 0.8): (458, 46), (0.5, 0.5): (137, 70), (0.8, 0.2): (98, 56)},
    (128, 128): {(0.2, 0.8): (440, 46), (0.5, 0.5): (136, 72), (0.8, 0.2): (146, 56)},
    (128, 256): {(0.2, 0.8): (436, 48), (0.5, 0.5): (138, 71), (0.8, 0.2): (232, 56)},
    (256, 16): {(0.2, 0.8): (1237, 60), (0.5, 0.5): (181, 101), (0.8, 0.2): (59, 77)},
    (256, 32): {(0.2, 0.8): (1165, 59), (0.5, 0.5): (174, 100), (0.8, 0.2): (78, 76)},
    (256, 64): {(0.2, 0.8): (1149, 58), (0.5, 0.5): (171, 99), (0.8, 0.2): (100, 76)},
    (256, 128): {(0.2, 0.8): (1044, 59), (0.5, 0.5): (168, 100), (0.8, 0.2): (150, 76)},
    (256, 256): {(0.2, 0.8): (985, 60), (0.5, 0.5): (166, 101), (0.8, 0.2): (234, 76)},
}

_KIND_ORDER = {PreconditionerKind.NONE: 0, PreconditionerKind.PN: 1, PreconditionerKind.SN: 2}


def expand_preconditioners(choice: str) -> list[PreconditionerKind]:
    """``both`` is none + PN, ``all`` adds SN; anything else names one kind."""
    if choice == "both":
        return [PreconditionerKind.NONE, PreconditionerKind.PN]
    if choice == "all":
        return [PreconditionerKind.NONE, PreconditionerKind.PN, PreconditionerKind.SN]
    return [PreconditionerKind(choice)]


@dataclass(frozen=True)
class ExperimentCell:
    m: int
    n: int
    xi: float
    eta: float
    precond: PreconditionerKind

    @property
    def sort_key(self) -> tuple:
        return (self.xi, self.eta, self.m, self.n, _KIND_ORDER[self.precond])


@dataclass
class CellResult:
    cell: ExperimentCell
    params: FractionalParams
    seed: int
    iterations: int
    converged: bool
    final_relres: float
    rel_error_f: float
    wall_time_s: float
    residual_history: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    def row(self) -> tuple:
        p, c = self.params, self.cell
        return (c.m, c.n, p.xi, p.eta, p.rho, p.lam, p.epsilon, self.seed, c.precond.value,
                self.iterations, self.converged, self.final_relres, self.rel_error_f,
                self.wall_time_s)


@dataclass
class RunOutcome:
    results: list[CellResult] = field(default_factory=list)
    refused: list[tuple[ExperimentCell, str]] = field(default_factory=list)
    failed: list[tuple[ExperimentCell, str]] = field(default_factory=list)

    def rows(self) -> list[tuple]:
        return [r.row() for r in self.results]


@dataclass(frozen=True)
class ProblemChoice:
    """Registry names of the problem data shared by all cells."""
    coefficient: str = "x"
    coefficient_value: float = 1.0
    time_profile: str = "t2"
    source: str = "x_sin_pi_x"
    initial: str = "zero"


class ExperimentRunner:
    def __init__(self, params: FractionalParams, problem: ProblemChoice | None = None,
                 opts: GmresOptions | None = None, seed: int = 0,
                 budget: MemoryBudget | None = None, jobs: int = 1):
        self.params = params
        self.problem = problem or ProblemChoice()
        self.opts = opts or GmresOptions()
        self.seed = seed
        self.jobs = max(1, jobs)
        self.budget = budget or MemoryBudget(0)
        self._lock = threading.Lock()

    def cells(self, grids: Iterable[Sequence[int]], kinds: Sequence[PreconditionerKind],
              orders: Iterable[tuple[float, float]] | None = None) -> list[ExperimentCell]:
        orders = list(orders) if orders is not None else [(self.params.xi, self.params.eta)]
        return [ExperimentCell(int(m), int(n), xi, eta, kind)
                for xi, eta in orders for m, n in grids for kind in kinds]

    def spec_for(self, cell: ExperimentCell) -> ProblemSpec:
        params = dataclasses.replace(self.params, xi=cell.xi, eta=cell.eta)
        return ProblemSpec.from_names(params, cell.m, cell.n, seed=self.seed,
                                      **dataclasses.asdict(self.problem))

    def run_cell(self, cell: ExperimentCell) -> CellResult:
        spec = self.spec_for(cell)
        opts = self.budget.apply(self.opts, spec.grid.N)
        start = time.perf_counter()
        result = run_experiment(spec, cell.precond, opts)
        elapsed = time.perf_counter() - start
        report = result.report
        return CellResult(cell, spec.params, self.seed, report.iterations, report.converged,
                          report.true_relres, result.rel_error_f, elapsed,
                          report.residual_history)

    def run(self, cells: Sequence[ExperimentCell]) -> RunOutcome:
        outcome = RunOutcome()

        def _collect(cell: ExperimentCell, future) -> None:
            try:
                res = future.result()
            except ResourceCapError as exc:
                logger.warning("cell m=%d n=%d xi=%g eta=%g %s refused: %s",
                               cell.m, cell.n, cell.xi, cell.eta, cell.precond.value, exc)
                with self._lock:
                    outcome.refused.append((cell, str(exc)))
                return
            except (SingularityError, BreakdownError) as exc:
                logger.error("cell m=%d n=%d xi=%g eta=%g %s failed: %s",
                             cell.m, cell.n, cell.xi, cell.eta, cell.precond.value, exc)
                with self._lock:
                    outcome.failed.append((cell, str(exc)))
                return
            if not res.converged:
                logger.warning("cell m=%d n=%d %s did not converge in %d iterations",
                               cell.m, cell.n, cell.precond.value, res.iterations)
            logger.info("cell m=%d n=%d xi=%g eta=%g %s: %d iterations in %.2fs",
                        cell.m, cell.n, cell.xi, cell.eta, cell.precond.value,
                        res.iterations, res.wall_time_s)
            with self._lock:
                outcome.results.append(res)

        with ThreadPoolExecutor(max_workers=self.jobs) as executor:
            futures = {executor.submit(self.run_cell, cell): cell for cell in cells}
            for future in as_completed(futures):
                _collect(futures[future], future)

        outcome.results.sort(key=lambda r: r.cell.sort_key)
        outcome.refused.sort(key=lambda item: item[0].sort_key)
        outcome.failed.sort(key=lambda item: item[0].sort_key)
        return outcome


def table1_cells(runner: ExperimentRunner, sizes: Sequence[int] = TABLE1_SIZES,
                 orders: Sequence[tuple[float, float]] = TABLE1_ORDERS) -> list[ExperimentCell]:
    grids = [(m, n) for m in sizes for n in sizes]
    return runner.cells(grids, [PreconditionerKind.NONE, PreconditionerKind.PN], orders)


def format_table1(results: Iterable[CellResult],
                  orders: Sequence[tuple[float, float]] = TABLE1_ORDERS,
                  reference: dict | None = None) -> str:
    """Iteration table: rows (m, n), one (unpreconditioned, P_N) column pair per order pair.

    Missing cells print as '-'. With ``reference`` each count is followed by
    the published value in parentheses.
    """
    counts: dict[tuple, int] = {}
    grids: set[tuple[int, int]] = set()
    for res in results:
        c = res.cell
        counts[(c.m, c.n, c.xi, c.eta, c.precond)] = res.iterations
        grids.add((c.m, c.n))

    width = 12 if reference else 6
    head1 = f"{'m':>5} {'n':>5} " + " ".join(f"{f'xi={xi:g} eta={eta:g}':^{2 * width + 1}}"
                                              for xi, eta in orders)
    head2 = f"{'':>5} {'':>5} " + " ".join(f"{'-':>{width}} {'P_N':>{width}}" for _ in orders)
    lines = [head1, head2]
    for m, n in sorted(grids):
        cells = []
        for xi, eta in orders:
            ref = (reference or {}).get((m, n), {}).get((xi, eta))
            for i, kind in enumerate((PreconditionerKind.NONE, PreconditionerKind.PN)):
                value = counts.get((m, n, xi, eta, kind))
                text = "-" if value is None else str(value)
                if reference is not None and ref is not None:
                    text = f"{text} ({ref[i]})"
                cells.append(f"{text:>{width}}")
        lines.append(f"{m:>5} {n:>5} " + " ".join(cells))
    return "\n".join(lines)


# ----------------------------------------------------------------------
# Comparison with the published counts
# ----------------------------------------------------------------------

PN_ABS_SLACK = 3
PN_REL_SLACK = 0.10
PLAIN_REL_SLACK = 0.15
PN_SPREAD_OVER_N = 3


def within_reference(measured: int, expected: int, kind: PreconditionerKind) -> bool:
    """P_N within max(3, 10 %) of the published count, unpreconditioned within 15 %."""
    if kind is PreconditionerKind.NONE:
        return abs(measured - expected) <= PLAIN_REL_SLACK * expected
    return abs(measured - expected) <= max(PN_ABS_SLACK, PN_REL_SLACK * expected)


def reference_deviations(results: Iterable[CellResult],
                         reference: dict = REFERENCE_ITERATIONS) -> list[str]:
    """One message per cell whose count falls outside its tolerance."""
    failures = []
    for res in results:
        c = res.cell
        ref = reference.get((c.m, c.n), {}).get((c.xi, c.eta))
        if ref is None or c.precond is PreconditionerKind.SN:
            continue
        expected = ref[0] if c.precond is PreconditionerKind.NONE else ref[1]
        if not within_reference(res.iterations, expected, c.precond):
            failures.append(f"m={c.m} n={c.n} xi={c.xi} eta={c.eta} {c.precond.value}: "
                            f"{res.iterations} vs {expected}")
    return failures


def table1_shape_failures(results: Iterable[CellResult], sizes: Sequence[int],
                          orders: Sequence[tuple[float, float]] = TABLE1_ORDERS) -> list[str]:
    """For fixed m the P_N count spreads by at most 3 across n and grows sublinearly in m."""
    pn = {(r.cell.m, r.cell.n, r.cell.xi, r.cell.eta): r.iterations
          for r in results if r.cell.precond is PreconditionerKind.PN}
    failures = []
    for xi, eta in orders:
        per_m = {}
        for m in sizes:
            counts = [pn[(m, n, xi, eta)] for n in sizes if (m, n, xi, eta) in pn]
            if not counts:
                continue
            per_m[m] = statistics.median(counts)
            if max(counts) - min(counts) > PN_SPREAD_OVER_N:
                failures.append(f"xi={xi} eta={eta} m={m}: P_N counts over n spread "
                                f"{min(counts)}..{max(counts)}")
        ms = sorted(per_m)
        for small, large in zip(ms, ms[1:]):
            if per_m[large] / per_m[small] >= large / small:
                failures.append(f"xi={xi} eta={eta}: P_N growth {per_m[small]} -> {per_m[large]} "
                                f"from m={small} to m={large} is not sublinear")
    return failures
