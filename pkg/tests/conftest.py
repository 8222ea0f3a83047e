"""
Shared pytest fixtures for the fidesp tests.
"""
import json
import os
import sys

# Ensure project root is on path for all tests
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import numpy as np
import pytest

from core.params import FractionalParams
from core.pipeline import ProblemSpec


@pytest.fixture()
def rng():
    """Seeded generator so every test draws the same vectors on every run."""
    return np.random.default_rng(20240501)


@pytest.fixture()
def make_spec():
    """Factory for small ProblemSpec instances.

    Defaults follow the standard experiment: a(x) = x, q(t) = t^2,
    f(x) = x sin(pi x), phi = 0, rho = 1, lambda = 5e-3, epsilon = 0.01.
    Keyword arguments split between FractionalParams fields and the
    registry names accepted by ``ProblemSpec.from_names``.
    """
    param_keys = {"xi", "eta", "rho", "lam", "epsilon", "T"}

    def _make(m: int = 6, n: int = 5, **kwargs) -> ProblemSpec:
        params = {"xi": 0.5, "eta": 0.5}
        params.update({k: kwargs.pop(k) for k in list(kwargs) if k in param_keys})
        return ProblemSpec.from_names(FractionalParams(**params), m, n, **kwargs)

    return _make


@pytest.fixture()
def write_config(tmp_path):
    """Write a run configuration to tmp_path and return its path.

    The log file is disabled unless the caller sets ``log_dir`` explicitly.
    """
    def _write(data: dict, name: str = "run.json") -> str:
        payload = {"log_dir": None, **data}
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)

    return _write
