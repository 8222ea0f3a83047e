"""Dense spectral diagnostics for small systems.

Eigenvalue clustering of P_N^{-1} A_N, singular value distributions of A_N,
P_N, B_m and U_n against their symbols, and the rank of the remainder
A_N - P_N. Everything here is O(N^3) and refuses sizes above the dense cap.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from core.errors import ParameterError, ResourceCapError
from core.operators import (DENSE_LIMIT, AllAtOnceOperator, LowerToeplitz, assemble_operator,
                            materialize_dense)
from core.params import Grid
from core.precond import BlockTriangularPreconditioner, remainder_columns, remainder_matrix, solve_PN
from core.symbols import (DEFAULT_TRUNCATION, CompositeSymbol, SymbolSeries, composite_eval,
                          quantile_distance, resample_sorted, space_symbol, time_symbol)

logger = logging.getLogger(__name__)

CLUSTER_EPS = 1e-6
DISTANCE_THRESHOLD = 0.1


@dataclass
class SpectralReport:
    label: str
    values: np.ndarray
    outlier_count: int = 0
    epsilon: float = CLUSTER_EPS
    reference: np.ndarray | None = None
    distance: float | None = None
    threshold: float | None = None
    size: int = 0

    @property
    def passed(self) -> bool | None:
        if self.distance is None or self.threshold is None:
            return None
        return self.distance <= self.threshold


def _check_size(M: np.ndarray, limit: int) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] > limit:
        raise ResourceCapError(f"dense spectrum of size {M.shape[0]} exceeds limit {limit}")
    return M


def eig_dense(M, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Eigenvalues via LAPACK; triangular input returns its diagonal."""
    M = _check_size(M, limit)
    if not np.any(np.tril(M, -1)) or not np.any(np.triu(M, 1)):
        return np.diag(M).astype(np.complex128)
    return scipy.linalg.eigvals(M, check_finite=False)


def svd_dense(M, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Singular values in ascending order."""
    M = _check_size(M, limit)
    return np.sort(scipy.linalg.svdvals(M, check_finite=False))


def cluster_count(values, center: complex, eps: float) -> int:
    """Number of values at distance >= eps from center."""
    if not eps > 0.0:
        raise ParameterError(f"cluster radius must be positive, got {eps}")
    return int(np.count_nonzero(np.abs(np.asarray(values) - center) >= eps))


# ----------------------------------------------------------------------
# Clustering of the preconditioned matrix
# ----------------------------------------------------------------------

def preconditioned_matrix(op: AllAtOnceOperator, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Dense P_N^{-1} A_N = I + P_N^{-1} R_N; only the last m columns differ from I."""
    if op.N > limit:
        raise ResourceCapError(f"preconditioned matrix of size {op.N} exceeds limit {limit}")
    pre = BlockTriangularPreconditioner.from_operator(op)
    nm = op.n * op.m
    R = np.zeros((op.N, op.m))
    R[:nm] = remainder_columns(op)
    M = np.eye(op.N)
    M[:, nm:] += solve_PN(pre, R)
    return M


def cluster_report(op: AllAtOnceOperator, eps: float = CLUSTER_EPS,
                   limit: int = DENSE_LIMIT) -> SpectralReport:
    values = np.sort_complex(eig_dense(preconditioned_matrix(op, limit), limit))
    outliers = cluster_count(values, 1.0, eps)
    logger.info("P_N^-1 A_N (m=%d n=%d): %d of %d eigenvalues outside the %.1e cluster at 1",
                op.m, op.n, outliers, op.N, eps)
    return SpectralReport("PN_inv_AN", values, outliers, eps, size=op.N)


def remainder_rank(op: AllAtOnceOperator, limit: int = DENSE_LIMIT) -> int:
    return int(np.linalg.matrix_rank(remainder_matrix(op, limit)))


def eigen_report(label: str, matrix, center: complex, eps: float = CLUSTER_EPS,
                 reference=None, limit: int = DENSE_LIMIT) -> SpectralReport:
    """Eigenvalues of ``matrix`` with the count outside the eps-disk at ``center``."""
    values = np.sort_complex(eig_dense(matrix, limit))
    report = SpectralReport(label, values, cluster_count(values, center, eps), eps,
                            size=values.size)
    if reference is not None:
        reference = np.sort(np.asarray(reference, dtype=np.float64))
        report.reference = reference
        report.distance = float(np.max(np.abs(np.sort(values.real) - reference)))
    return report


def gm_eigen_report(op: AllAtOnceOperator, eps: float = CLUSTER_EPS) -> SpectralReport:
    """Eigenvalues of G_m against the samples delta_0 a(x_i)."""
    expected = op.Gm.Bm.first_col[0] * op.Gm.a.values
    report = eigen_report("G_m", op.Gm.dense, 0.0, eps, reference=expected)
    report.outlier_count = int(np.count_nonzero(
        np.abs(np.sort(report.values.real) - report.reference) >= eps))
    return report


# ----------------------------------------------------------------------
# Singular value distributions
# ----------------------------------------------------------------------

def _distribution(label: str, singular_values: np.ndarray, samples: np.ndarray,
                  threshold: float) -> SpectralReport:
    reference = resample_sorted(np.abs(samples), singular_values.size)
    distance = quantile_distance(singular_values, reference)
    logger.info("%s: quantile distance %.4g (threshold %.3g)", label, distance, threshold)
    return SpectralReport(label, singular_values, reference=reference, distance=distance,
                          threshold=threshold, size=singular_values.size)


def toeplitz_distribution(T: LowerToeplitz, symbol: SymbolSeries, copies: int = 1,
                          threshold: float = DISTANCE_THRESHOLD, label: str = "toeplitz",
                          limit: int = DENSE_LIMIT) -> SpectralReport:
    """Singular values of T kron I_copies against |symbol| on a uniform angle grid."""
    if T.s * copies > limit:
        raise ResourceCapError(f"distribution check of size {T.s * copies} exceeds limit {limit}")
    sv = np.sort(np.repeat(svd_dense(T.to_dense(), limit), copies))
    return _distribution(label, sv, symbol.sample(T.s * copies), threshold)


def _composite_lattice(op: AllAtOnceOperator, symbol: CompositeSymbol) -> np.ndarray:
    """|symbol| on a midpoint lattice over [0,1] x [-pi,pi]^2 with about N points."""
    side = max(1, math.ceil(math.sqrt(op.m)))
    x = (np.arange(side) + 0.5) / side
    th1 = -np.pi + (np.arange(op.n + 1) + 0.5) * (2.0 * np.pi / (op.n + 1))
    th2 = -np.pi + (np.arange(side) + 0.5) * (2.0 * np.pi / side)
    values = composite_eval(symbol, x[:, None, None], th1[None, :, None], th2[None, None, :])
    return np.abs(values).ravel()


def composite_symbol(op: AllAtOnceOperator, spec, truncation: int = DEFAULT_TRUNCATION) -> CompositeSymbol:
    tau = spec.params.rho * spec.grid.dt
    return CompositeSymbol(
        hxi=time_symbol(spec.params.xi, tau, truncation),
        geta=space_symbol(spec.params.eta, truncation),
        nu=op.ratio,
        a=spec.a,
    )


def _on_grid(spec, m: int, n: int):
    return dataclasses.replace(spec, grid=Grid(m, n, spec.params.T))


def distribution_check_AN(m: int, n: int, spec, truncation: int = DEFAULT_TRUNCATION,
                          threshold: float = DISTANCE_THRESHOLD,
                          limit: int = DENSE_LIMIT) -> SpectralReport:
    """Singular values of A_N against |h_xi(t1) + nu a(x) g_eta(t2)|, nu = alpha_n/beta_m."""
    spec = _on_grid(spec, m, n)
    op = assemble_operator(spec)
    sv = svd_dense(materialize_dense(op, limit), limit)
    symbol = composite_symbol(op, spec, truncation)
    logger.debug("A_N distribution check m=%d n=%d nu=%.6g", m, n, symbol.nu)
    return _distribution("A_N", sv, _composite_lattice(op, symbol), threshold)


def distribution_check_PN(m: int, n: int, spec, truncation: int = DEFAULT_TRUNCATION,
                          threshold: float = DISTANCE_THRESHOLD,
                          limit: int = DENSE_LIMIT) -> SpectralReport:
    """Same comparison for P_N, which shares the symbol of A_N."""
    spec = _on_grid(spec, m, n)
    op = assemble_operator(spec)
    pre = BlockTriangularPreconditioner.from_operator(op)
    sv = svd_dense(materialize_dense(pre, limit), limit)
    symbol = composite_symbol(op, spec, truncation)
    return _distribution("P_N", sv, _composite_lattice(op, symbol), threshold)
