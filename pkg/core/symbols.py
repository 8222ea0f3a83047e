"""Truncated generating functions of B_m (g_eta) and U_n (h_xi).

Both symbols have one-sided Fourier support, so a symbol is stored as its
coefficients c_0..c_K plus a bound on the discarded tail sum_{k>K} |c_k|.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from core.coeffs import space_weights, time_weights
from core.errors import ParameterError

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 10_000
# 1.05 covers |c_k| <= |order(order-1)| (k-1)^(-1-order) for large k; small K widens it.
_TAIL_SLACK = 1.05
_EVAL_CHUNK = 64


def _tail_bound(order: float, K: int) -> float:
    slack = max(_TAIL_SLACK, ((K + 1) / K) ** (1.0 + order))
    return abs(order * (order - 1.0)) * slack * K ** (-order) / order


def uniform_angles(count: int) -> np.ndarray:
    """Midpoint grid of ``count`` angles in (-pi, pi)."""
    if count < 1:
        raise ParameterError(f"angle count must be positive, got {count}")
    return -np.pi + (np.arange(count) + 0.5) * (2.0 * np.pi / count)


@dataclass(frozen=True)
class SymbolSeries:
    coeffs: np.ndarray
    K: int
    tail_bound: float

    def __call__(self, theta) -> np.ndarray:
        """Evaluate sum_k c_k e^{i k theta}; accepts scalars or arrays."""
        theta = np.asarray(theta, dtype=np.float64)
        flat = np.remainder(theta.ravel() + np.pi, 2.0 * np.pi) - np.pi
        k = np.arange(self.coeffs.size, dtype=np.float64)
        out = np.empty(flat.size, dtype=np.complex128)
        for start in range(0, flat.size, _EVAL_CHUNK):
            chunk = flat[start:start + _EVAL_CHUNK]
            out[start:start + chunk.size] = np.exp(1j * np.outer(chunk, k)) @ self.coeffs
        return out.reshape(theta.shape)

    def sample(self, count: int) -> np.ndarray:
        return self(uniform_angles(count))


def space_symbol(eta: float, K: int = DEFAULT_TRUNCATION) -> SymbolSeries:
    """g_eta truncated after K: coefficients delta_0..delta_K."""
    if int(K) != K or K < 1:
        raise ParameterError(f"truncation K must be a positive integer, got {K}")
    _, delta = space_weights(eta, K + 1)
    return SymbolSeries(coeffs=delta, K=K, tail_bound=_tail_bound(eta, K))


def time_symbol(xi: float, tau: float, K: int = DEFAULT_TRUNCATION) -> SymbolSeries:
    """h_xi truncated after K: coefficients gamma_k e^{-k tau}, tau = rho*dt."""
    if int(K) != K or K < 1:
        raise ParameterError(f"truncation K must be a positive integer, got {K}")
    if tau < 0.0:
        raise ParameterError(f"tau must be non-negative, got {tau}")
    _, gamma = time_weights(xi, K + 1)
    coeffs = gamma * np.exp(-tau * np.arange(K + 1))
    bound = _tail_bound(xi, K) * math.exp(-(K + 1) * tau)
    return SymbolSeries(coeffs=coeffs, K=K, tail_bound=bound)


@dataclass(frozen=True)
class CompositeSymbol:
    """h_xi(theta1) + nu a(x) g_eta(theta2)."""
    hxi: SymbolSeries
    geta: SymbolSeries
    nu: float
    a: Callable[[np.ndarray], np.ndarray] = field(compare=False)


def composite_eval(sym: CompositeSymbol, x, th1, th2) -> np.ndarray:
    """Broadcasting evaluation over x in [0, 1] and angles in [-pi, pi]."""
    x = np.asarray(x, dtype=np.float64)
    a_x = np.broadcast_to(np.asarray(sym.a(x), dtype=np.float64), x.shape)
    return sym.hxi(th1) + sym.nu * a_x * sym.geta(th2)


def quantile_distance(values, symbol_samples) -> float:
    """Sup distance between two sorted samples of equal length."""
    values = np.asarray(values, dtype=np.float64)
    symbol_samples = np.asarray(symbol_samples, dtype=np.float64)
    if values.shape != symbol_samples.shape or values.ndim != 1:
        raise ParameterError(
            f"sample lengths differ: {values.shape} vs {symbol_samples.shape}")
    if values.size == 0:
        return 0.0
    if np.any(np.diff(values) < 0) or np.any(np.diff(symbol_samples) < 0):
        raise ParameterError("quantile_distance expects ascending samples")
    return float(np.max(np.abs(values - symbol_samples)))


def resample_sorted(samples, length: int) -> np.ndarray:
    """Empirical quantile function of ``samples`` read off at ``length`` points."""
    ordered = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if ordered.size == 0:
        raise ParameterError("cannot resample an empty sample")
    if ordered.size == length:
        return ordered
    source = (np.arange(ordered.size) + 0.5) / ordered.size
    target = (np.arange(length) + 0.5) / length
    return np.interp(target, source, ordered)
