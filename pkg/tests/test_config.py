"""Tests for ConfigManager loading, merging and validation."""

from pathlib import Path

import pytest

from config.config_manager import DEFAULT_CONFIG, SEED_ENV, ConfigManager, RunConfig, _deep_merge
from core.errors import ConfigError

EXAMPLE = Path(__file__).resolve().parent.parent / "config" / "example_run.json"


class TestLoading:
    def test_defaults_without_file(self):
        cfg = ConfigManager().validate()
        assert isinstance(cfg, RunConfig)
        assert cfg.problem.lam == 5e-3
        assert cfg.grids == [(16, 16)]
        assert cfg.solver.preconditioner == "both"

    def test_example_file_validates(self):
        cfg = ConfigManager(str(EXAMPLE)).validate()
        assert cfg.problem.xi == 0.2
        assert cfg.output.seed == 7
        assert (32, 32) in cfg.grids

    def test_partial_file_merges_over_defaults(self, write_config):
        path = write_config({"problem": {"xi": 0.8}, "grids": [[8, 4]]})
        manager = ConfigManager(path)
        assert manager.get("problem.xi") == 0.8
        assert manager.get("problem.eta") == 0.5
        cfg = manager.validate()
        assert cfg.grids == [(8, 4)]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            ConfigManager(str(tmp_path / "nope.json"))

    def test_malformed_reports_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "problem": {"xi": 0.2,,}\n}\n')
        with pytest.raises(ConfigError, match="line 2"):
            ConfigManager(str(path))

    def test_top_level_must_be_mapping(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="mapping"):
            ConfigManager(str(path))

    def test_empty_file_means_defaults(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert ConfigManager(str(path)).config == DEFAULT_CONFIG


class TestValidation:
    @pytest.mark.parametrize("override,field", [
        ({"problem": {"xi": 1.5}}, "problem.xi"),
        ({"problem": {"lambda": 0}}, "problem.lambda"),
        ({"solver": {"tol": -1}}, "solver.tol"),
        ({"solver": {"maxit": 0}}, "solver.maxit"),
        ({"solver": {"preconditioner": "ilu"}}, "solver.preconditioner"),
        ({"grids": [[0, 4]]}, "grids"),
        ({"output": {"mem_budget_mb": -5}}, "output.mem_budget_mb"),
    ])
    def test_invalid_values_name_the_field(self, write_config, override, field):
        with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
            ConfigManager(write_config(override)).validate()

    def test_unknown_key_rejected(self, write_config):
        with pytest.raises(ConfigError, match="solver.restart"):
            ConfigManager(write_config({"solver": {"restart": 20}})).validate()

    def test_unknown_profile_rejected(self, write_config):
        with pytest.raises(ConfigError, match="unknown coefficient"):
            ConfigManager(write_config({"problem": {"coefficient": "exp"}})).validate()

    def test_circulant_needs_constant_coefficient(self, write_config):
        with pytest.raises(ConfigError, match="constant coefficient"):
            ConfigManager(write_config({"solver": {"preconditioner": "SN"}})).validate()

    def test_circulant_with_constant_coefficient(self, write_config):
        cfg = ConfigManager(write_config({"problem": {"coefficient": "constant"},
                                          "solver": {"preconditioner": "all"}})).validate()
        assert cfg.problem.constant_coefficient

    def test_lambda_alias(self, write_config):
        cfg = ConfigManager(write_config({"problem": {"lambda": 0.25}})).validate()
        assert cfg.problem.lam == 0.25
        assert cfg.problem.to_params().lam == 0.25

    def test_maxit_value(self, write_config):
        assert ConfigManager().validate().solver.maxit_value is None
        cfg = ConfigManager(write_config({"solver": {"maxit": 40}})).validate()
        assert cfg.solver.maxit_value == 40

    def test_logging_level_case_insensitive(self, write_config):
        cfg = ConfigManager(write_config({"logging_level": "debug"})).validate()
        assert cfg.logging_level == "DEBUG"


class TestAccess:
    def test_dotted_set_and_get(self):
        manager = ConfigManager()
        manager.set("output.spectra.size_cap", 100)
        assert manager.get("output.spectra.size_cap") == 100
        assert manager.validate().output.spectra.size_cap == 100

    def test_get_default_for_missing(self):
        manager = ConfigManager()
        assert manager.get("output.nothing", "fallback") == "fallback"
        assert manager.get("problem.xi.deeper", 3) == 3

    def test_defaults_not_shared_between_managers(self):
        first = ConfigManager()
        first.set("problem.xi", 0.9)
        assert ConfigManager().get("problem.xi") == 0.5

    def test_deep_merge(self):
        merged = _deep_merge({"a": {"b": 1, "c": 2}, "d": 3}, {"a": {"b": 10}, "e": 4})
        assert merged == {"a": {"b": 10, "c": 2}, "d": 3, "e": 4}


class TestSeed:
    def test_flag_wins(self, write_config, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "5")
        manager = ConfigManager(write_config({"output": {"seed": 9}}))
        assert manager.resolve_seed(1) == 1

    def test_config_over_env(self, write_config, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "5")
        assert ConfigManager(write_config({"output": {"seed": 9}})).resolve_seed() == 9

    def test_env_over_default(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "5")
        assert ConfigManager().resolve_seed() == 5

    def test_default_zero(self, monkeypatch):
        monkeypatch.delenv(SEED_ENV, raising=False)
        assert ConfigManager().resolve_seed() == 0

    def test_bad_env(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "abc")
        with pytest.raises(ConfigError, match=SEED_ENV):
            ConfigManager().resolve_seed()
