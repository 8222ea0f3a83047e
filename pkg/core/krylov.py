"""Full (unrestarted) GMRES with optional left or right preconditioning."""
import logging
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
import scipy.linalg

from core.errors import BreakdownError, ParameterError, ResourceCapError

logger = logging.getLogger(__name__)

Action = Callable[[np.ndarray], np.ndarray]

REORTH_THRESHOLD = 1e-8
_BREAKDOWN_RTOL = 1e-14
_INITIAL_CAPACITY = 64
_PROGRESS_EVERY = 50


@dataclass(frozen=True)
class GmresOptions:
    """Stopping rule and resource limits.

    ``maxit=None`` means the system size. ``max_basis`` caps the number of
    stored Arnoldi vectors; exceeding it raises ResourceCapError. ``side``
    places the preconditioner: "right" stops on the true residual, "left" on
    the preconditioned one.
    """
    tol: float = 1e-8
    maxit: int | None = None
    record_residuals: bool = True
    reorthogonalize: bool = True
    max_basis: int | None = None
    side: Literal["left", "right"] = "right"

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ParameterError(f"side must be 'left' or 'right', got {self.side!r}")
        if not self.tol > 0.0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.maxit is not None and self.maxit < 1:
            raise ParameterError(f"maxit must be >= 1, got {self.maxit}")
        if self.max_basis is not None and self.max_basis < 2:
            raise ParameterError(f"max_basis must be >= 2, got {self.max_basis}")


@dataclass
class GmresReport:
    iterations: int
    converged: bool
    residual_history: np.ndarray
    solution: np.ndarray
    true_relres: float = field(default=float("nan"))

    @property
    def final_relres(self) -> float:
        return float(self.residual_history[-1]) if self.residual_history.size else 0.0


class _Basis:
    """Row-stacked Arnoldi basis and Hessenberg matrix with doubling capacity."""

    def __init__(self, size: int, limit: int, max_basis: int | None):
        self.size = size
        self.limit = limit
        self.max_basis = max_basis
        self.capacity = 0
        self.V = np.empty((0, size))
        self.H = np.empty((1, 0))
        self._grow(min(_INITIAL_CAPACITY, limit))

    def _grow(self, capacity: int) -> None:
        V = np.empty((capacity + 1, self.size))
        H = np.zeros((capacity + 1, capacity))
        V[:self.V.shape[0]] = self.V
        H[:self.H.shape[0], :self.H.shape[1]] = self.H
        self.V, self.H, self.capacity = V, H, capacity

    def ensure(self, j: int) -> None:
        """Make room for column j of H and basis vector j + 1."""
        if self.max_basis is not None and j + 2 > self.max_basis:
            raise ResourceCapError(
                f"GMRES needs more than {self.max_basis} basis vectors of length {self.size}")
        if j >= self.capacity:
            self._grow(min(2 * self.capacity, self.limit))


def gmres(apply_a: Action, b, opts: GmresOptions | None = None,
          apply_pinv: Action | None = None) -> GmresReport:
    """Solve A x = b from a zero initial guess.

    Arnoldi uses modified Gram-Schmidt with one optional second pass, the
    least-squares problem is kept triangular by Givens rotations. With
    ``apply_pinv`` and ``side="right"`` the iteration runs on A P^{-1} and
    returns x = P^{-1} y, so the residuals are those of the original system.
    With ``side="left"`` it runs on P^{-1} A against P^{-1} b and the history
    holds preconditioned residuals; ``true_relres`` is unpreconditioned in
    both cases.
    """
    opts = opts or GmresOptions()
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1:
        raise ParameterError(f"right-hand side must be a vector, got shape {b.shape}")
    size = b.size
    if float(np.linalg.norm(b)) == 0.0:
        return GmresReport(0, True, np.zeros(1), np.zeros(size), 0.0)

    left = apply_pinv is not None and opts.side == "left"
    if left:
        def operator(v):
            return apply_pinv(apply_a(v))

        def precondition(v):
            return v

        rhs = np.asarray(apply_pinv(b), dtype=np.float64)
    else:
        precondition = apply_pinv if apply_pinv is not None else (lambda v: v)

        def operator(v):
            return apply_a(precondition(v))

        rhs = b
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        raise BreakdownError("preconditioned right-hand side is zero")

    maxit = opts.maxit if opts.maxit is not None else size
    basis = _Basis(size, maxit, opts.max_basis)
    basis.V[0] = rhs / bnorm
    cs = np.zeros(maxit)
    sn = np.zeros(maxit)
    g = np.zeros(maxit + 1)
    g[0] = bnorm
    history = [1.0]
    converged = False
    k = 0

    for j in range(maxit):
        basis.ensure(j)
        V, H = basis.V, basis.H
        w = np.asarray(operator(V[j]), dtype=np.float64).copy()
        wnorm0 = float(np.linalg.norm(w))
        for i in range(j + 1):
            H[i, j] = V[i] @ w
            w -= H[i, j] * V[i]
        hnorm = float(np.linalg.norm(w))
        if opts.reorthogonalize and hnorm > 0.0:
            overlap = V[:j + 1] @ w
            if np.max(np.abs(overlap)) > REORTH_THRESHOLD * hnorm:
                w -= overlap @ V[:j + 1]
                H[:j + 1, j] += overlap
                hnorm = float(np.linalg.norm(w))
        H[j + 1, j] = hnorm

        for i in range(j):
            hi = cs[i] * H[i, j] - sn[i] * H[i + 1, j]
            H[i + 1, j] = sn[i] * H[i, j] + cs[i] * H[i + 1, j]
            H[i, j] = hi
        nu = float(np.hypot(H[j, j], H[j + 1, j]))
        if nu == 0.0:
            raise BreakdownError(f"GMRES stalled at iteration {j + 1}: singular Hessenberg column")
        cs[j] = H[j, j] / nu
        sn[j] = -H[j + 1, j] / nu
        H[j, j] = nu
        H[j + 1, j] = 0.0
        g[j + 1] = sn[j] * g[j]
        g[j] *= cs[j]

        k = j + 1
        relres = abs(g[k]) / bnorm
        history.append(relres)
        if k % _PROGRESS_EVERY == 0:
            logger.debug("gmres iteration %d: relres=%.3e", k, relres)
        if relres <= opts.tol:
            converged = True
            break
        if hnorm <= _BREAKDOWN_RTOL * wnorm0:
            raise BreakdownError(
                f"Arnoldi breakdown at iteration {k} with relative residual {relres:.3e}")
        basis.V[k] = w / hnorm

    y = scipy.linalg.solve_triangular(basis.H[:k, :k], g[:k], check_finite=False)
    x = np.asarray(precondition(y @ basis.V[:k]), dtype=np.float64)
    true_relres = float(np.linalg.norm(b - apply_a(x))) / float(np.linalg.norm(b))
    if converged:
        logger.debug("gmres converged in %d iterations (relres=%.3e, true=%.3e)",
                     k, history[-1], true_relres)
    else:
        logger.warning("gmres stopped after %d iterations without reaching tol=%g (relres=%.3e)",
                       k, opts.tol, history[-1])
    residuals = np.asarray(history if opts.record_residuals else history[-1:])
    return GmresReport(k, converged, residuals, x, true_relres)
