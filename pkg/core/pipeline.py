"""End-to-end inverse source experiment.

1. manufacture final-time data phi from a known source with the direct scheme,
2. perturb it with seeded uniform noise of level epsilon,
3. solve the regularized all-at-once system for (u, f) with GMRES,
4. compare the reconstructed source with the true one.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from core.coeffs import scalings, time_weights
from core.errors import ParameterError
from core.krylov import GmresOptions, GmresReport, gmres
from core.operators import assemble_operator, direct_operator, solve_direct
from core.params import FractionalParams, Grid, PreconditionerKind
from core.precond import build_preconditioner
from core.problems import COEFFICIENTS, INITIAL_CONDITIONS, SOURCES, TIME_PROFILES, Profile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProblemSpec:
    params: FractionalParams
    grid: Grid
    a: Profile = field(compare=False)
    q: Profile = field(compare=False)
    phi0: Profile = field(compare=False)
    f_true: Profile | None = field(default=None, compare=False)
    seed: int = 0

    def __post_init__(self):
        if self.grid.T != self.params.T:
            raise ParameterError(f"grid horizon T={self.grid.T} differs from params T={self.params.T}")

    @classmethod
    def from_names(cls, params: FractionalParams, m: int, n: int, *, coefficient: str = "x",
                   coefficient_value: float = 1.0, time_profile: str = "t2",
                   source: str = "x_sin_pi_x", initial: str = "zero", seed: int = 0) -> "ProblemSpec":
        """Build a spec from registry names, as the run configuration does."""
        return cls(
            params=params,
            grid=Grid(m, n, params.T),
            a=COEFFICIENTS.build(coefficient, value=coefficient_value),
            q=TIME_PROFILES.build(time_profile),
            phi0=INITIAL_CONDITIONS.build(initial),
            f_true=SOURCES.build(source),
            seed=seed,
        )

    def sample(self, fn: Profile | None) -> np.ndarray:
        """Values of ``fn`` at the interior nodes (zeros when fn is None)."""
        x = self.grid.x
        if fn is None:
            return np.zeros_like(x)
        return np.broadcast_to(np.asarray(fn(x), dtype=np.float64), x.shape).copy()


@dataclass
class InverseResult:
    f_rec: np.ndarray
    u: np.ndarray
    report: GmresReport
    rel_error_f: float = float("nan")
    phi_eps: np.ndarray | None = None


def discrete_l2_norm(v, dx: float) -> float:
    """Delta-x weighted Euclidean norm, the grid analogue of the L2(0, 1) norm."""
    v = np.asarray(v, dtype=np.float64)
    return math.sqrt(dx) * float(np.linalg.norm(v))


def _history_blocks(spec: ProblemSpec) -> np.ndarray:
    """Rows j = 1..n of b_{j-1} e^{-j rho dt} phi, shaped (n, m)."""
    b, _ = time_weights(spec.params.xi, spec.grid.n)
    j = np.arange(1, spec.grid.n + 1)
    damping = b * np.exp(-spec.params.rho * spec.grid.dt * j)
    return np.outer(damping, spec.sample(spec.phi0))


def direct_rhs(spec: ProblemSpec) -> np.ndarray:
    """Right-hand side of the forward scheme driven by ``spec.f_true``."""
    alpha_n, _ = scalings(spec.params, spec.grid)
    q = np.broadcast_to(np.asarray(spec.q(spec.grid.t), dtype=np.float64), (spec.grid.n,))
    blocks = _history_blocks(spec) + alpha_n * np.outer(q, spec.sample(spec.f_true))
    return blocks.ravel()


def noise(seed: int, size: int) -> np.ndarray:
    """i.i.d. uniform(-1, 1) draws from a Philox counter-based generator."""
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.uniform(-1.0, 1.0, size)


def manufacture_final_data(spec: ProblemSpec) -> tuple[np.ndarray, np.ndarray]:
    op = direct_operator(spec)
    u = solve_direct(op, direct_rhs(spec))
    phi = u[-spec.grid.m:].copy()
    phi_eps = phi + spec.params.epsilon * noise(spec.seed, spec.grid.m)
    logger.debug("final data: |phi|=%.6g |phi_eps - phi|=%.3g",
                 float(np.linalg.norm(phi)), float(np.linalg.norm(phi_eps - phi)))
    return phi, phi_eps


def assemble_rhs(spec: ProblemSpec, phi_eps) -> np.ndarray:
    phi_eps = np.asarray(phi_eps, dtype=np.float64)
    if phi_eps.shape != (spec.grid.m,):
        raise ParameterError(f"phi_eps must have {spec.grid.m} entries, got shape {phi_eps.shape}")
    return np.concatenate([_history_blocks(spec).ravel(), phi_eps])


def solve_inverse(spec: ProblemSpec, phi_eps, precond: PreconditionerKind | str = PreconditionerKind.PN,
                  opts: GmresOptions | None = None) -> InverseResult:
    op = assemble_operator(spec)
    pre = build_preconditioner(op, precond)
    z = assemble_rhs(spec, phi_eps)
    report = gmres(op.matvec, z, opts, apply_pinv=pre.solve if pre is not None else None)
    nm = op.n * op.m
    u, f_rec = report.solution[:nm], report.solution[nm:]
    rel_error = float("nan")
    if spec.f_true is not None:
        f_exact = spec.sample(spec.f_true)
        denom = discrete_l2_norm(f_exact, spec.grid.dx)
        if denom > 0.0:
            rel_error = discrete_l2_norm(f_rec - f_exact, spec.grid.dx) / denom
    logger.info("inverse solve m=%d n=%d precond=%s: %d iterations, converged=%s, rel_error_f=%.4g",
                op.m, op.n, PreconditionerKind(precond).value, report.iterations,
                report.converged, rel_error)
    return InverseResult(f_rec=f_rec, u=u, report=report, rel_error_f=rel_error,
                         phi_eps=np.asarray(phi_eps, dtype=np.float64))


def run_experiment(spec: ProblemSpec, precond: PreconditionerKind | str = PreconditionerKind.PN,
                   opts: GmresOptions | None = None) -> InverseResult:
    _, phi_eps = manufacture_final_data(spec)
    return solve_inverse(spec, phi_eps, precond, opts)
