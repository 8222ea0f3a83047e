"""
Performance benchmarks for the structured operators and preconditioner solves.

Run with:
    pytest tests/test_performance.py -v -s

Results are written to tests/perf_results/<iso-timestamp>.json.
If tests/perf_results/baseline.json exists, each benchmark is compared
against it and a warning is emitted for regressions > 20 %.

To lock in the current run as the new baseline:
    cp tests/perf_results/<latest>.json tests/perf_results/baseline.json
"""
import json
import time
import warnings
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from core.operators import LowerToeplitz, apply_AN, assemble_operator
from core.precond import (BlockTriangularPreconditioner, CirculantPreconditioner, solve_PN,
                          solve_SN)

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

PERF_DIR = Path(__file__).parent / "perf_results"
BASELINE_PATH = PERF_DIR / "baseline.json"
REGRESSION_THRESHOLD = 0.20  # warn if mean_ms is > 20 % slower than baseline


def _bench(fn: Callable, iterations: int = 100, warmup: int = 2) -> dict:
    """Time *iterations* calls of *fn* after *warmup* untimed calls (ms)."""
    for _ in range(warmup):
        fn()
    timings = np.empty(iterations)
    for i in range(iterations):
        t0 = time.perf_counter()
        fn()
        timings[i] = (time.perf_counter() - t0) * 1000
    return {
        "iterations": iterations,
        "total_ms": float(timings.sum()),
        "mean_ms": float(timings.mean()),
        "median_ms": float(np.median(timings)),
        "min_ms": float(timings.min()),
        "max_ms": float(timings.max()),
    }


class PerfTracker:
    """Collects benchmark results and persists them at session end."""

    def __init__(self):
        self.results: dict[str, dict] = {}
        self.baseline: dict[str, dict] = self._load_baseline()

    def _load_baseline(self) -> dict:
        if BASELINE_PATH.exists():
            return json.loads(BASELINE_PATH.read_text())
        return {}

    def record(self, name: str, stats: dict):
        self.results[name] = stats
        if name in self.baseline:
            base_mean = self.baseline[name]["mean_ms"]
            delta = (stats["mean_ms"] - base_mean) / base_mean
            if delta > REGRESSION_THRESHOLD:
                warnings.warn(
                    f"PERF REGRESSION [{name}]: "
                    f"{stats['mean_ms']:.3f} ms vs baseline {base_mean:.3f} ms "
                    f"(+{delta * 100:.1f} %)"
                )

    def save(self):
        PERF_DIR.mkdir(exist_ok=True)
        ts = datetime.now(tz=timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        out_path = PERF_DIR / f"{ts}.json"
        out_path.write_text(json.dumps(self.results, indent=2))
        return out_path


@pytest.fixture(scope="module")
def perf_tracker():
    tracker = PerfTracker()
    yield tracker
    saved = tracker.save()
    print(f"\n[perf] Results saved to {saved}")


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

@pytest.fixture()
def system_64(make_spec):
    """A_N and P_N on the 64 x 64 grid of the standard experiment."""
    op = assemble_operator(make_spec(64, 64))
    return op, BlockTriangularPreconditioner.from_operator(op)


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------

class TestOperatorPerformance:
    """Matrix-free products."""

    def test_toeplitz_matvec_4096(self, rng, perf_tracker):
        """FFT product with a 4096 x 4096 lower triangular Toeplitz matrix."""
        T = LowerToeplitz(rng.standard_normal(4096))
        v = rng.standard_normal(4096)
        T.matvec(v)  # warm the cached column transform

        stats = _bench(lambda: T.matvec(v))
        perf_tracker.record("operators.toeplitz_matvec_4096", stats)

        print(f"\n  toeplitz matvec 4096: {stats['mean_ms']:.3f} ms mean")
        assert stats["mean_ms"] < 20

    def test_apply_AN_64(self, system_64, rng, perf_tracker):
        """apply_AN on the 64 x 64 grid (N = 4160)."""
        op, _ = system_64
        v = rng.standard_normal(op.N)

        stats = _bench(lambda: apply_AN(op, v))
        perf_tracker.record("operators.apply_AN_64x64", stats)

        print(f"\n  apply_AN 64x64: {stats['mean_ms']:.3f} ms mean")
        assert stats["mean_ms"] < 50


class TestPreconditionerPerformance:
    """One preconditioner solve per GMRES iteration dominates the run time."""

    def test_solve_PN_64(self, system_64, rng, perf_tracker):
        _, pre = system_64
        r = rng.standard_normal(pre.N)
        solve_PN(pre, r)  # warm the cached diagonal blocks

        stats = _bench(lambda: solve_PN(pre, r), iterations=20)
        perf_tracker.record("precond.solve_PN_64x64", stats)

        print(f"\n  solve_PN 64x64: {stats['mean_ms']:.3f} ms mean")
        assert stats["mean_ms"] < 200

    def test_solve_SN_64(self, make_spec, rng, perf_tracker):
        op = assemble_operator(make_spec(64, 64, coefficient="constant"))
        pre = CirculantPreconditioner.from_operator(op)
        r = rng.standard_normal(pre.N)

        stats = _bench(lambda: solve_SN(pre, r))
        perf_tracker.record("precond.solve_SN_64x64", stats)

        print(f"\n  solve_SN 64x64: {stats['mean_ms']:.3f} ms mean")
        assert stats["mean_ms"] < 20

    def test_solve_PN_scaling(self, make_spec, rng, perf_tracker):
        """Doubling m and n costs about 8x (O(n^2 m + n m^2)); allow generous slack."""
        timings = {}
        for size in (32, 64):
            pre = BlockTriangularPreconditioner.from_operator(assemble_operator(make_spec(size, size)))
            r = rng.standard_normal(pre.N)
            solve_PN(pre, r)
            timings[size] = _bench(lambda: solve_PN(pre, r), iterations=10)
            perf_tracker.record(f"precond.solve_PN_scaling_{size}", timings[size])

        ratio = timings[64]["min_ms"] / max(timings[32]["min_ms"], 1e-3)
        print(f"\n  solve_PN 64/32 time ratio: {ratio:.1f}")
        assert ratio < 40
