"""Preconditioners for A_N: the exact block lower triangular P_N and its Strang
circulant counterpart S_N.

P_N is A_N with the source column block (-alpha_n q kron I_m) dropped, so
A_N - P_N has rank at most m and P_N^{-1} A_N has at least N - m unit
eigenvalues.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from core.errors import ConfigError, ParameterError, ResourceCapError, SingularityError
from core.operators import (DENSE_LIMIT, AllAtOnceOperator, DirectOperator, GmOperator,
                            LowerToeplitz, _as_operand, solve_direct)
from core.params import PreconditionerKind

logger = logging.getLogger(__name__)

STRANG_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class BlockTriangularPreconditioner:
    Un: LowerToeplitz
    Gm: GmOperator
    alpha_n: float
    beta_m: float
    lam: float

    def __post_init__(self):
        # both raise SingularityError with the offending row
        self.direct.block
        self.final_block

    @classmethod
    def from_operator(cls, op: AllAtOnceOperator) -> "BlockTriangularPreconditioner":
        return cls(op.Un, op.Gm, op.alpha_n, op.beta_m, op.lam)

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

    @cached_property
    def direct(self) -> DirectOperator:
        return DirectOperator(self.Un, self.Gm, self.alpha_n, self.beta_m)

    @cached_property
    def final_block(self) -> np.ndarray:
        block = (self.lam / self.beta_m) * self.Gm.dense
        zeros = np.flatnonzero(np.diag(block) == 0.0)
        if zeros.size:
            i = int(zeros[0])
            raise SingularityError(f"zero pivot in the final block at row {i}", index=self.n * self.m + i)
        return block

    def matvec(self, v) -> np.ndarray:
        v = _as_operand(v, self.N, "P_N")
        nm = self.n * self.m
        out = np.empty_like(v)
        out[:nm] = self.direct.matvec(v[:nm])
        out[nm:] = v[nm - self.m:nm] + (self.lam / self.beta_m) * self.Gm.matvec(v[nm:])
        return out

    def solve(self, r) -> np.ndarray:
        return solve_PN(self, r)

    def to_dense(self) -> np.ndarray:
        nm = self.n * self.m
        return np.block([
            [self.direct.to_dense(), np.zeros((nm, self.m))],
            [np.kron(np.eye(1, self.n, self.n - 1), np.eye(self.m)), self.final_block],
        ])


def solve_PN(p: BlockTriangularPreconditioner, r) -> np.ndarray:
    """Block forward substitution with P_N."""
    r = _as_operand(r, p.N, "solve_PN")
    nm = p.n * p.m
    w = np.empty_like(r)
    w[:nm] = solve_direct(p.direct, r[:nm])
    w[nm:] = scipy.linalg.solve_triangular(p.final_block, r[nm:] - w[nm - p.m:nm],
                                           lower=True, check_finite=False)
    return w


# ----------------------------------------------------------------------
# Strang circulant variant
# ----------------------------------------------------------------------

def strang_column(t: LowerToeplitz) -> np.ndarray:
    """First column of the Strang circulant of a lower triangular Toeplitz matrix.

    Entries t_k are kept for k <= s // 2; the wrapped part stays zero since
    there is no upper triangle to copy from.
    """
    col = np.zeros(t.s)
    keep = t.s // 2 + 1
    col[:keep] = t.first_col[:keep]
    return col


def strang_eigs(t: LowerToeplitz) -> np.ndarray:
    return np.fft.fft(strang_column(t))


def _check_spectrum(values: np.ndarray, what: str, offset: int = 0) -> None:
    magnitude = np.abs(values)
    scale = magnitude.max()
    bad = np.flatnonzero(magnitude < STRANG_RTOL * scale) if scale > 0 else np.arange(values.size)
    if bad.size:
        i = int(bad[0])
        raise SingularityError(f"{what} eigenvalue {i} is numerically zero "
                               f"(|value|={magnitude.flat[i]:.3g}, max={scale:.3g})", index=offset + i)


@dataclass(frozen=True, eq=False)
class CirculantPreconditioner:
    """S_N: U_n and B_m replaced by their Strang circulants, constant coefficient a."""
    eigs_time: np.ndarray
    eigs_space: np.ndarray
    a: float
    alpha_n: float
    beta_m: float
    lam: float

    def __post_init__(self):
        _check_spectrum(self.combined, "combined space-time")
        _check_spectrum(self.final, "final block", offset=self.n * self.m)

    @classmethod
    def from_operator(cls, op: AllAtOnceOperator) -> "CirculantPreconditioner":
        if not op.Gm.a.is_constant:
            raise ConfigError("the circulant preconditioner needs a constant coefficient a(x)")
        pre = cls(strang_eigs(op.Un), strang_eigs(op.Gm.Bm), float(op.Gm.a.values[0]),
                  op.alpha_n, op.beta_m, op.lam)
        logger.debug("S_N built: m=%d n=%d min|combined|=%.3g", pre.m, pre.n,
                     float(np.abs(pre.combined).min()))
        return pre

    @property
    def m(self) -> int:
        return self.eigs_space.size

    @property
    def n(self) -> int:
        return self.eigs_time.size

    @property
    def N(self) -> int:
        return (self.n + 1) * self.m

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    @property
    def dtype(self):
        return np.dtype(np.float64)

    @cached_property
    def combined(self) -> np.ndarray:
        """Eigenvalues of S(U_n) kron I + (alpha/beta) a I kron S(B_m), shaped (n, m)."""
        ratio = self.alpha_n / self.beta_m
        return self.eigs_time[:, None] + ratio * self.a * self.eigs_space[None, :]

    @cached_property
    def final(self) -> np.ndarray:
        return (self.lam / self.beta_m) * self.a * self.eigs_space

    def _fields(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        nm = self.n * self.m
        return v[:nm].reshape((self.n, self.m) + v.shape[1:]), v[nm:]

    def _spectral(self, values: np.ndarray, ndim: int) -> np.ndarray:
        return values.reshape(values.shape + (1,) * ndim)

    def matvec(self, v) -> np.ndarray:
        v = _as_operand(v, self.N, "S_N")
        u, f = self._fields(v)
        extra = v.ndim - 1
        out = np.empty_like(v)
        top = np.fft.ifft2(np.fft.fft2(u, axes=(0, 1)) * self._spectral(self.combined, extra), axes=(0, 1))
        bottom = np.fft.ifft(np.fft.fft(f, axis=0) * self._spectral(self.final, extra), axis=0)
        out[:self.n * self.m] = top.real.reshape((-1,) + v.shape[1:])
        out[self.n * self.m:] = u[-1] + bottom.real
        return out

    def solve(self, r) -> np.ndarray:
        return solve_SN(self, r)

    def to_dense(self) -> np.ndarray:
        ratio = self.alpha_n / self.beta_m
        cu = scipy.linalg.circulant(np.fft.ifft(self.eigs_time).real)
        cb = scipy.linalg.circulant(np.fft.ifft(self.eigs_space).real)
        nm = self.n * self.m
        return np.block([
            [np.kron(cu, np.eye(self.m)) + ratio * self.a * np.kron(np.eye(self.n), cb),
             np.zeros((nm, self.m))],
            [np.kron(np.eye(1, self.n, self.n - 1), np.eye(self.m)),
             (self.lam / self.beta_m) * self.a * cb],
        ])


def solve_SN(c: CirculantPreconditioner, r) -> np.ndarray:
    """O(nm log nm) solve: 2-D FFT division for the field, 1-D for the source."""
    r = _as_operand(r, c.N, "solve_SN")
    u, f = c._fields(r)
    extra = r.ndim - 1
    w = np.empty(r.shape, dtype=np.float64)
    field = np.fft.ifft2(np.fft.fft2(u, axes=(0, 1)) / c._spectral(c.combined, extra), axes=(0, 1)).real
    rhs = f - field[-1]
    w[:c.n * c.m] = field.reshape((-1,) + r.shape[1:])
    w[c.n * c.m:] = np.fft.ifft(np.fft.fft(rhs, axis=0) / c._spectral(c.final, extra), axis=0).real
    return w


# ----------------------------------------------------------------------
# Remainder
# ----------------------------------------------------------------------

def remainder_matrix(op: AllAtOnceOperator, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Dense R_N = A_N - P_N, nonzero only in the last m columns of the first nm rows."""
    if op.N > limit:
        raise ResourceCapError(f"remainder of size {op.N} exceeds dense limit {limit}")
    R = np.zeros((op.N, op.N))
    R[:op.n * op.m, op.n * op.m:] = remainder_columns(op)
    return R


def remainder_columns(op: AllAtOnceOperator) -> np.ndarray:
    """The nm x m nonzero block of R_N."""
    return -op.alpha_n * np.kron(op.q[:, None], np.eye(op.m))


_BUILDERS = {
    PreconditionerKind.PN: BlockTriangularPreconditioner.from_operator,
    PreconditionerKind.SN: CirculantPreconditioner.from_operator,
}


def build_preconditioner(op: AllAtOnceOperator, kind: PreconditionerKind | str):
    """Preconditioner instance for ``kind``, or None for no preconditioning."""
    try:
        kind = PreconditionerKind(kind)
    except ValueError:
        raise ParameterError(f"unknown preconditioner {kind!r}") from None
    if kind is PreconditionerKind.NONE:
        return None
    return _BUILDERS[kind](op)
