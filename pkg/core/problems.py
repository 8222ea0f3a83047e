"""Named problem data: coefficients a(x), time profiles q(t), sources f(x) and
initial conditions phi(x), selectable from the run configuration.
"""
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from core.errors import ConfigError

logger = logging.getLogger(__name__)

Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    factory: Callable[..., Profile]
    description: str = ""
    constant: bool = False


class FunctionRegistry:
    """Registry of profile factories for one role (coefficient, source, ...)."""

    def __init__(self, role: str):
        self.role = role
        self.entries: dict[str, RegistryEntry] = {}

    def register(self, name: str, description: str = "", constant: bool = False):
        def decorator(factory: Callable[..., Profile]):
            if name in self.entries:
                logger.warning("%s %r already registered, overriding", self.role, name)
            self.entries[name] = RegistryEntry(name, factory, description, constant)
            return factory
        return decorator

    def get(self, name: str) -> RegistryEntry:
        try:
            return self.entries[name]
        except KeyError:
            known = ", ".join(sorted(self.entries))
            raise ConfigError(f"unknown {self.role} {name!r} (known: {known})") from None

    def build(self, name: str, **kwargs) -> Profile:
        return self.get(name).factory(**kwargs)

    def names(self) -> list[str]:
        return sorted(self.entries)


COEFFICIENTS = FunctionRegistry("coefficient")
TIME_PROFILES = FunctionRegistry("time profile")
SOURCES = FunctionRegistry("source")
INITIAL_CONDITIONS = FunctionRegistry("initial condition")


def _zero(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(x, dtype=np.float64))


@COEFFICIENTS.register("x", "a(x) = value * x")
def _linear_coefficient(value: float = 1.0) -> Profile:
    return lambda x: value * np.asarray(x, dtype=np.float64)


@COEFFICIENTS.register("constant", "a(x) = value", constant=True)
def _constant_coefficient(value: float = 1.0) -> Profile:
    return lambda x: np.full_like(np.asarray(x, dtype=np.float64), value)


@TIME_PROFILES.register("t2", "q(t) = t^2")
def _quadratic_profile() -> Profile:
    return lambda t: np.asarray(t, dtype=np.float64) ** 2


@TIME_PROFILES.register("t", "q(t) = t")
def _linear_profile() -> Profile:
    return lambda t: np.asarray(t, dtype=np.float64)


@TIME_PROFILES.register("one", "q(t) = 1")
def _unit_profile() -> Profile:
    return lambda t: np.ones_like(np.asarray(t, dtype=np.float64))


@SOURCES.register("x_sin_pi_x", "f(x) = x sin(pi x)")
def _x_sin_source() -> Profile:
    return lambda x: np.asarray(x, dtype=np.float64) * np.sin(np.pi * np.asarray(x, dtype=np.float64))


@SOURCES.register("sin_pi_x", "f(x) = sin(pi x)")
def _sin_source() -> Profile:
    return lambda x: np.sin(np.pi * np.asarray(x, dtype=np.float64))


@SOURCES.register("zero", "f(x) = 0")
def _zero_source() -> Profile:
    return _zero


@INITIAL_CONDITIONS.register("zero", "phi(x) = 0")
def _zero_initial() -> Profile:
    return _zero


@INITIAL_CONDITIONS.register("sin_pi_x", "phi(x) = sin(pi x)")
def _sin_initial() -> Profile:
    return lambda x: np.sin(np.pi * np.asarray(x, dtype=np.float64))
