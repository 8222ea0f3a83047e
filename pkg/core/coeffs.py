"""L1 weight sequences and the scalings alpha_n, beta_m.

b_l = (l+1)^(1-order) - l^(1-order); gamma/delta are first differences of b/d.
The differences are taken from the computed b/d table (not from the three-term
power formula) so partial sums of gamma telescope onto b up to rounding.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn

from core.errors import ParameterError
from core.params import FractionalParams, Grid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoeffTables:
    b: np.ndarray
    gamma: np.ndarray
    d: np.ndarray
    delta: np.ndarray
    alpha_n: float
    beta_m: float


def _l1_weights(order: float, count: int, name: str) -> tuple[np.ndarray, np.ndarray]:
    if not 0.0 < order < 1.0:
        raise ParameterError(f"{name} must lie in (0, 1), got {order}")
    if int(count) != count or count < 1:
        raise ParameterError(f"sequence length must be a positive integer, got {count}")
    powers = np.arange(count + 1, dtype=np.float64) ** (1.0 - order)
    weights = np.diff(powers)
    diffs = np.empty_like(weights)
    diffs[0] = weights[0]
    diffs[1:] = np.diff(weights)
    return weights, diffs


def time_weights(xi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(b, gamma)``, each of length n."""
    return _l1_weights(xi, n, "xi")


def space_weights(eta: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(d, delta)``, each of length m."""
    return _l1_weights(eta, m, "eta")


def scalings(params: FractionalParams, grid: Grid) -> tuple[float, float]:
    """``alpha_n = dt^xi Gamma(2-xi)`` and ``beta_m = dx^eta Gamma(2-eta)``."""
    if grid.T != params.T:
        raise ParameterError(f"grid horizon T={grid.T} differs from params T={params.T}")
    alpha_n = float(grid.dt ** params.xi * gamma_fn(2.0 - params.xi))
    beta_m = float(grid.dx ** params.eta * gamma_fn(2.0 - params.eta))
    return alpha_n, beta_m


def coeff_tables(params: FractionalParams, grid: Grid) -> CoeffTables:
    b, gamma = time_weights(params.xi, grid.n)
    d, delta = space_weights(params.eta, grid.m)
    alpha_n, beta_m = scalings(params, grid)
    logger.debug("coeff tables: m=%d n=%d alpha_n=%.6g beta_m=%.6g",
                 grid.m, grid.n, alpha_n, beta_m)
    return CoeffTables(b=b, gamma=gamma, d=d, delta=delta, alpha_n=alpha_n, beta_m=beta_m)


def l1_error_constant(order: float) -> float:
    """Leading constant of the L1 truncation error for a derivative of this order."""
    if not 0.0 < order < 1.0:
        raise ParameterError(f"order must lie in (0, 1), got {order}")
    return (0.25 + order / ((1.0 - order) * (2.0 - order))) / (2.0 * math.gamma(1.0 - order))
