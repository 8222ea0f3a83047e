# core/params.py
"""Enums and frozen dataclasses shared across coeffs, operators, pipeline and cli."""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from core.errors import ParameterError


class PreconditionerKind(Enum):
    NONE = "none"
    PN = "PN"
    SN = "SN"

    @classmethod
    def _missing_(cls, value):
        """Case-insensitive lookup so ``PreconditionerKind("pn")`` works."""
        if isinstance(value, str):
            for member in cls:
                if member.value.lower() == value.lower():
                    return member
        return None


@dataclass(frozen=True)
class FractionalParams:
    """Orders, tempering, regularization and noise of one experiment."""
    xi: float
    eta: float
    rho: float = 1.0
    lam: float = 5e-3
    epsilon: float = 0.01
    T: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.xi < 1.0:
            raise ParameterError(f"xi must lie in (0, 1), got {self.xi}")
        if not 0.0 < self.eta < 1.0:
            raise ParameterError(f"eta must lie in (0, 1), got {self.eta}")
        if not self.rho > 0.0:
            raise ParameterError(f"rho must be positive, got {self.rho}")
        if not self.lam > 0.0:
            raise ParameterError(f"lambda must be positive, got {self.lam}")
        if not self.epsilon >= 0.0:
            raise ParameterError(f"epsilon must be non-negative, got {self.epsilon}")
        if not self.T > 0.0:
            raise ParameterError(f"T must be positive, got {self.T}")


@dataclass(frozen=True)
class Grid:
    """Uniform space-time mesh: m interior nodes on (0, 1), n steps on (0, T]."""
    m: int
    n: int
    T: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError(f"m must be a positive integer, got {self.m}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n}")
        if not self.T > 0.0:
            raise ParameterError(f"T must be positive, got {self.T}")

    @property
    def dx(self) -> float:
        return 1.0 / (self.m + 1)

    @property
    def dt(self) -> float:
        return self.T / self.n

    @property
    def N(self) -> int:
        """Size of the all-at-once system."""
        return (self.n + 1) * self.m

    @property
    def x(self) -> np.ndarray:
        """Interior nodes x_1..x_m."""
        return np.arange(1, self.m + 1) * self.dx

    @property
    def t(self) -> np.ndarray:
        """Time levels t_1..t_n (right endpoints)."""
        return np.arange(1, self.n + 1) * self.dt
