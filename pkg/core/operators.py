"""Structured operators of the L1 scheme: B_m, U_n, G_m, A_N and the direct matrix.

Vectors of the space-time field are stored time-major, block j holding the m
values of u^{(j)}; reshaping to ``(n, m)`` puts time on axis 0 and space on
axis 1. Every operator accepts a single vector or a stack of column vectors
``(N, k)``, which is how ``materialize_dense`` builds dense matrices.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Callable

import numpy as np
import scipy.linalg

from core.coeffs import coeff_tables
from core.errors import ParameterError, ResourceCapError, SingularityError

if TYPE_CHECKING:
    from core.pipeline import ProblemSpec

logger = logging.getLogger(__name__)

DENSE_LIMIT = 4096


def _embedding_size(s: int) -> int:
    """Smallest power of two >= 2s - 1."""
    return 1 << (2 * s - 2).bit_length()


def _scale_rows(values: np.ndarray, w: np.ndarray) -> np.ndarray:
    return values.reshape((-1,) + (1,) * (w.ndim - 1)) * w


def _as_operand(v, size: int, what: str) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim not in (1, 2) or v.shape[0] != size:
        raise ParameterError(f"{what} expects {size} rows, got shape {v.shape}")
    if not np.iscomplexobj(v):
        v = v.astype(np.float64, copy=False)
    return v


# ----------------------------------------------------------------------
# Toeplitz and diagonal building blocks
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LowerToeplitz:
    """Lower triangular Toeplitz matrix T[i, j] = t_{i-j} (i >= j)."""
    first_col: np.ndarray

    def __post_init__(self):
        col = np.asarray(self.first_col, dtype=np.float64)
        if col.ndim != 1 or col.size == 0:
            raise ParameterError(f"first column must be a non-empty vector, got shape {col.shape}")
        object.__setattr__(self, "first_col", col)

    @property
    def s(self) -> int:
        return self.first_col.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.s, self.s)

    @property
    def dtype(self):
        return self.first_col.dtype

    @cached_property
    def _col_fft(self) -> np.ndarray:
        return np.fft.rfft(self.first_col, _embedding_size(self.s))

    def matvec(self, v) -> np.ndarray:
        return toeplitz_matvec(self, v)

    def to_dense(self) -> np.ndarray:
        row = np.zeros(self.s)
        row[0] = self.first_col[0]
        return scipy.linalg.toeplitz(self.first_col, row)


def toeplitz_matvec(T: LowerToeplitz, v) -> np.ndarray:
    """Product T @ v through a zero-padded circulant embedding and real FFTs."""
    v = _as_operand(v, T.s, "toeplitz_matvec")
    if np.iscomplexobj(v):
        return toeplitz_matvec(T, v.real) + 1j * toeplitz_matvec(T, v.imag)
    size = _embedding_size(T.s)
    col_fft = T._col_fft if v.ndim == 1 else T._col_fft[:, None]
    product = np.fft.irfft(col_fft * np.fft.rfft(v, size, axis=0), size, axis=0)
    return product[:T.s]


@dataclass(frozen=True, eq=False)
class DiagonalSampler:
    """D_m(a): the coefficient sampled at the interior nodes."""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ParameterError(f"sampler values must be a non-empty vector, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, a: Callable[[np.ndarray], np.ndarray], m: int,
               require_nonzero: bool = True) -> "DiagonalSampler":
        """Sample ``a`` at x_i = i/(m+1), i = 1..m."""
        x = np.arange(1, m + 1) / (m + 1)
        values = np.broadcast_to(np.asarray(a(x), dtype=np.float64), x.shape).copy()
        if require_nonzero:
            zeros = np.flatnonzero(values == 0.0)
            if zeros.size:
                i = int(zeros[0])
                raise SingularityError(f"coefficient vanishes at node {i + 1} (x={x[i]:.6g})",
                                       index=i)
        return cls(values)

    @property
    def m(self) -> int:
        return self.values.size

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def matvec(self, v) -> np.ndarray:
        return _scale_rows(self.values, _as_operand(v, self.m, "DiagonalSampler"))

    def to_dense(self) -> np.ndarray:
        return np.diag(self.values)


def build_Bm(delta) -> LowerToeplitz:
    return LowerToeplitz(np.asarray(delta, dtype=np.float64).copy())


def build_Un(gamma, rho: float, dt: float) -> LowerToeplitz:
    """Tempered time matrix, first column gamma_k e^{-k rho dt}."""
    gamma = np.asarray(gamma, dtype=np.float64)
    return LowerToeplitz(gamma * np.exp(-rho * dt * np.arange(gamma.size)))


def apply_Gm(a: DiagonalSampler, Bm: LowerToeplitz, v) -> np.ndarray:
    if a.m != Bm.s:
        raise ParameterError(f"sampler has {a.m} nodes but B_m has size {Bm.s}")
    return _scale_rows(a.values, toeplitz_matvec(Bm, v))


@dataclass(frozen=True, eq=False)
class GmOperator:
    """G_m = D_m(a) B_m."""
    a: DiagonalSampler
    Bm: LowerToeplitz

    def __post_init__(self):
        if self.a.m != self.Bm.s:
            raise ParameterError(f"sampler has {self.a.m} nodes but B_m has size {self.Bm.s}")

    @property
    def m(self) -> int:
        return self.Bm.s

    @property
    def shape(self) -> tuple[int, int]:
        return self.Bm.shape

    @property
    def dtype(self):
        return self.Bm.dtype

    def matvec(self, v) -> np.ndarray:
        return apply_Gm(self.a, self.Bm, v)

    @cached_property
    def dense(self) -> np.ndarray:
        return self.a.values[:, None] * self.Bm.to_dense()

    def to_dense(self) -> np.ndarray:
        return self.dense.copy()


def _apply_space(Gm: GmOperator, u: np.ndarray) -> np.ndarray:
    """G_m applied to every time block of ``u`` shaped (n, m, ...)."""
    moved = np.moveaxis(u, 1, 0)
    out = Gm.matvec(moved.reshape(Gm.m, -1)).reshape(moved.shape)
    return np.moveaxis(out, 0, 1)


def _apply_time(Un: LowerToeplitz, u: np.ndarray) -> np.ndarray:
    """(U_n kron I_m) applied to ``u`` shaped (n, m, ...)."""
    return toeplitz_matvec(Un, u.reshape(Un.s, -1)).reshape(u.shape)


def diagonal_block(Un: LowerToeplitz, Gm: GmOperator, ratio: float) -> np.ndarray:
    """Dense gamma_0 I + ratio G_m, checked for zero pivots."""
    block = ratio * Gm.dense + Un.first_col[0] * np.eye(Gm.m)
    zeros = np.flatnonzero(np.diag(block) == 0.0)
    if zeros.size:
        raise SingularityError(f"zero pivot on the block diagonal at row {int(zeros[0])}",
                               index=int(zeros[0]))
    return block


def block_forward_substitution(time_col: np.ndarray, block: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (U kron I + I kron (block - t_0 I)) u = rhs for rhs shaped (n, m, ...).

    ``block`` already contains t_0 on its diagonal. History sums are direct,
    O(n^2 m) overall.
    """
    u = np.empty_like(rhs)
    for j in range(rhs.shape[0]):
        history = np.tensordot(time_col[j:0:-1], u[:j], axes=1)
        u[j] = scipy.linalg.solve_triangular(block, rhs[j] - history, lower=True,
                                             check_finite=False)
    return u


# ----------------------------------------------------------------------
# Space-time systems
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DirectOperator:
    """Block lower triangular matrix of the forward scheme, size nm."""
    Un: LowerToeplitz
    Gm: GmOperator
    alpha_n: float
    beta_m: float

    @property
    def m(self) -> int:
        return self.Gm.m

    @property
    def n(self) -> int:
        return self.Un.s

    @property
    def N(self) -> int:
        return self.n * self.m

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    @property
    def dtype(self):
        return np.dtype(np.float64)

    @property
    def ratio(self) -> float:
        return self.alpha_n / self.beta_m

    @cached_property
    def block(self) -> np.ndarray:
        return diagonal_block(self.Un, self.Gm, self.ratio)

    def matvec(self, v) -> np.ndarray:
        v = _as_operand(v, self.N, "DirectOperator")
        u = v.reshape((self.n, self.m) + v.shape[1:])
        out = _apply_time(self.Un, u) + self.ratio * _apply_space(self.Gm, u)
        return out.reshape(v.shape)

    def to_dense(self) -> np.ndarray:
        return (np.kron(self.Un.to_dense(), np.eye(self.m))
                + self.ratio * np.kron(np.eye(self.n), self.Gm.dense))


def solve_direct(op: DirectOperator, rhs) -> np.ndarray:
    rhs = _as_operand(rhs, op.N, "solve_direct")
    blocks = rhs.reshape((op.n, op.m) + rhs.shape[1:])
    return block_forward_substitution(op.Un.first_col, op.block, blocks).reshape(rhs.shape)


@dataclass(frozen=True, eq=False)
class AllAtOnceOperator:
    """A_N of the quasi-boundary regularized inverse problem, size (n+1)m.

    Block row j <= n couples the time history with G_m and the unknown source
    through -alpha_n q(t_j) f; the last block row is u^{(n)} + (lam/beta_m) G_m f.
    """
    Un: LowerToeplitz
    Gm: GmOperator
    alpha_n: float
    beta_m: float
    lam: float
    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.float64)
        if q.shape != (self.Un.s,):
            raise ParameterError(f"q must have {self.Un.s} samples, got shape {q.shape}")
        object.__setattr__(self, "q", q)

    @property
    def m(self) -> int:
        return self.Gm.m

    @property
    def n(self) -> int:
        return self.Un.s

    @property
    def N(self) -> int:
        return (self.n + 1) * self.m

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    @property
    def dtype(self):
        return np.dtype(np.float64)

    @property
    def ratio(self) -> float:
        return self.alpha_n / self.beta_m

    @cached_property
    def direct(self) -> DirectOperator:
        return DirectOperator(self.Un, self.Gm, self.alpha_n, self.beta_m)

    def split(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """View ``v`` as (u blocks shaped (n, m, ...), f block)."""
        nm = self.n * self.m
        return v[:nm].reshape((self.n, self.m) + v.shape[1:]), v[nm:]

    def matvec(self, v) -> np.ndarray:
        return apply_AN(self, v)

    def to_dense(self) -> np.ndarray:
        m = self.m
        source_col = -self.alpha_n * np.kron(self.q[:, None], np.eye(m))
        final_row = np.kron(np.eye(1, self.n, self.n - 1), np.eye(m))
        return np.block([
            [self.direct.to_dense(), source_col],
            [final_row, (self.lam / self.beta_m) * self.Gm.dense],
        ])


def apply_AN(op: AllAtOnceOperator, v) -> np.ndarray:
    v = _as_operand(v, op.N, "apply_AN")
    u, f = op.split(v)
    out = np.empty_like(v)
    top = (_apply_time(op.Un, u) + op.ratio * _apply_space(op.Gm, u)
           - op.alpha_n * np.multiply.outer(op.q, f))
    out[:op.n * op.m] = top.reshape((op.n * op.m,) + v.shape[1:])
    out[op.n * op.m:] = u[-1] + (op.lam / op.beta_m) * op.Gm.matvec(f)
    return out


def materialize_dense(op, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Dense matrix of any structured operator, built column by column from ``matvec``."""
    rows, cols = op.shape
    if max(rows, cols) > limit:
        raise ResourceCapError(f"dense materialization of size {rows}x{cols} exceeds limit {limit}")
    return np.asarray(op.matvec(np.eye(cols)))


# ----------------------------------------------------------------------
# Factories
# ----------------------------------------------------------------------

def _parts(spec: "ProblemSpec", require_nonzero: bool):
    tables = coeff_tables(spec.params, spec.grid)
    Un = build_Un(tables.gamma, spec.params.rho, spec.grid.dt)
    sampler = DiagonalSampler.sample(spec.a, spec.grid.m, require_nonzero=require_nonzero)
    return tables, Un, GmOperator(sampler, build_Bm(tables.delta))


def assemble_operator(spec: "ProblemSpec") -> AllAtOnceOperator:
    tables, Un, Gm = _parts(spec, require_nonzero=True)
    q = np.broadcast_to(np.asarray(spec.q(spec.grid.t), dtype=np.float64), (spec.grid.n,))
    op = AllAtOnceOperator(Un, Gm, tables.alpha_n, tables.beta_m, spec.params.lam, q.copy())
    logger.debug("assembled A_N: m=%d n=%d N=%d ratio=%.6g", op.m, op.n, op.N, op.ratio)
    return op


def direct_operator(spec: "ProblemSpec") -> DirectOperator:
    tables, Un, Gm = _parts(spec, require_nonzero=False)
    return DirectOperator(Un, Gm, tables.alpha_n, tables.beta_m)
