import copy
import logging
import os
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, field_validator, model_validator

from core.errors import ConfigError
from core.params import FractionalParams
from core.problems import COEFFICIENTS, INITIAL_CONDITIONS, SOURCES, TIME_PROFILES

logger = logging.getLogger(__name__)

SEED_ENV = "FIDESP_SEED"

DEFAULT_CONFIG = {
    "problem": {
        "xi": 0.5,
        "eta": 0.5,
        "rho": 1.0,
        "lambda": 5e-3,
        "epsilon": 0.01,
        "T": 1.0,
        "coefficient": "x",
        "coefficient_value": 1.0,
        "time_profile": "t2",
        "source": "x_sin_pi_x",
        "initial": "zero",
    },
    "grids": [[16, 16]],
    "solver": {
        "tol": 1e-8,
        "maxit": "size",           # "size" = N = (n+1)m, or an integer
        "preconditioner": "both",  # none, PN, SN, both (none + PN), all
        "reorthogonalize": True,
        "side": "right",           # preconditioner side: left or right
        "jobs": 1,
    },
    "output": {
        "csv": None,               # None = stdout
        "seed": None,              # None = $FIDESP_SEED, then 0
        "mem_budget_mb": 2048,     # 0 = unlimited
        "spectra": {
            "cluster_eps": 1e-6,
            "distance_threshold": 0.1,
            "size_cap": 4096,
            "symbol_truncation": 10000,
            "symbol_points": 512,
        },
    },
    "logging_level": "INFO",
    "log_dir": "~/.fidesp",        # None disables the log file
}


def _deep_merge(base: dict, override: dict) -> dict:
    result = dict(base)
    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _deep_merge(result[key], value)
        else:
            result[key] = value
    return result


# ----------------------------------------------------------------------
# Schema
# ----------------------------------------------------------------------

class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class ProblemBlock(_Block):
    xi: float = Field(0.5, gt=0.0, lt=1.0)
    eta: float = Field(0.5, gt=0.0, lt=1.0)
    rho: float = Field(1.0, gt=0.0)
    lam: float = Field(5e-3, gt=0.0, alias="lambda")
    epsilon: float = Field(0.01, ge=0.0)
    T: float = Field(1.0, gt=0.0)
    coefficient: str = "x"
    coefficient_value: float = 1.0
    time_profile: str = "t2"
    source: str = "x_sin_pi_x"
    initial: str = "zero"

    @field_validator("coefficient")
    @classmethod
    def _known_coefficient(cls, value: str) -> str:
        return _known(COEFFICIENTS, value)

    @field_validator("time_profile")
    @classmethod
    def _known_profile(cls, value: str) -> str:
        return _known(TIME_PROFILES, value)

    @field_validator("source")
    @classmethod
    def _known_source(cls, value: str) -> str:
        return _known(SOURCES, value)

    @field_validator("initial")
    @classmethod
    def _known_initial(cls, value: str) -> str:
        return _known(INITIAL_CONDITIONS, value)

    @property
    def constant_coefficient(self) -> bool:
        return COEFFICIENTS.get(self.coefficient).constant

    def to_params(self) -> FractionalParams:
        return FractionalParams(xi=self.xi, eta=self.eta, rho=self.rho, lam=self.lam,
                                epsilon=self.epsilon, T=self.T)


def _known(registry, value: str) -> str:
    if value not in registry.entries:
        raise ValueError(f"unknown {registry.role} {value!r}, expected one of {registry.names()}")
    return value


class SolverBlock(_Block):
    tol: float = Field(1e-8, gt=0.0)
    maxit: Literal["size"] | PositiveInt = "size"
    preconditioner: Literal["none", "PN", "SN", "both", "all"] = "both"
    reorthogonalize: bool = True
    side: Literal["left", "right"] = "right"
    jobs: PositiveInt = 1

    @property
    def maxit_value(self) -> int | None:
        return None if self.maxit == "size" else int(self.maxit)


class SpectraBlock(_Block):
    cluster_eps: float = Field(1e-6, gt=0.0)
    distance_threshold: float = Field(0.1, gt=0.0)
    size_cap: PositiveInt = 4096
    symbol_truncation: PositiveInt = 10000
    symbol_points: PositiveInt = 512


class OutputBlock(_Block):
    csv: str | None = None
    seed: int | None = Field(None, ge=0)
    mem_budget_mb: int = Field(2048, ge=0)
    spectra: SpectraBlock = SpectraBlock()


class RunConfig(_Block):
    problem: ProblemBlock = ProblemBlock()
    grids: list[tuple[PositiveInt, PositiveInt]] = [(16, 16)]
    solver: SolverBlock = SolverBlock()
    output: OutputBlock = OutputBlock()
    logging_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    log_dir: str | None = "~/.fidesp"

    @field_validator("logging_level", mode="before")
    @classmethod
    def _upper_level(cls, value):
        return value.upper() if isinstance(value, str) else value

    @model_validator(mode="after")
    def _circulant_needs_constant(self) -> "RunConfig":
        if self.solver.preconditioner in ("SN", "all") and not self.problem.constant_coefficient:
            raise ValueError(
                f"preconditioner {self.solver.preconditioner!r} uses the circulant variant, "
                f"which needs a constant coefficient (got {self.problem.coefficient!r})")
        return self


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(part) for part in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


# ----------------------------------------------------------------------
# Manager
# ----------------------------------------------------------------------

class ConfigManager:
    """Run configuration: defaults, merged file contents and dotted overrides."""

    def __init__(self, config_path: str | None = None):
        self.config_path = config_path
        self.config = self.load_config()

    def load_config(self) -> dict:
        defaults = copy.deepcopy(DEFAULT_CONFIG)
        if self.config_path is None:
            return defaults
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                user_config = yaml.safe_load(f) or {}
        except FileNotFoundError:
            raise ConfigError(f"Config file not found: {self.config_path}") from None
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
            raise ConfigError(f"Malformed config at {self.config_path}{where}") from exc
        if not isinstance(user_config, dict):
            raise ConfigError(f"Config at {self.config_path} must be a mapping, "
                              f"got {type(user_config).__name__}")
        logger.debug("Loaded config from %s", self.config_path)
        return _deep_merge(defaults, user_config)

    def get(self, key, default=None):
        keys = key.split('.')
        value = self.config
        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
            else:
                return default
        return value if value is not None else default

    def set(self, key, value):
        keys = key.split('.')
        node = self.config
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value

    def validate(self) -> RunConfig:
        try:
            return RunConfig.model_validate(self.config)
        except ValidationError as exc:
            source = self.config_path or "<defaults>"
            raise ConfigError(f"Invalid config {source}: {_format_errors(exc)}") from None

    def resolve_seed(self, cli_seed: int | None = None) -> int:
        """--seed flag, then output.seed, then $FIDESP_SEED, then 0."""
        if cli_seed is not None:
            return int(cli_seed)
        configured = self.get("output.seed")
        if configured is not None:
            return int(configured)
        env = os.environ.get(SEED_ENV)
        if env:
            try:
                return int(env)
            except ValueError:
                raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
        return 0

    @property
    def logging_level(self):
        return self.get("logging_level", "INFO")
