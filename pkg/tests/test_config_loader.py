import json

import pytest

from src.config_loader import SEED_ENV_VAR, Config, load_config
from src.exceptions import ConfigurationError


def test_defaults_are_loaded():
    config = Config()

    assert config.get("health.alpha") == pytest.approx(0.0043)
    assert config.get("health.h_max") == 300
    assert config.max_ticks == 8764
    assert config.get("missing.key", "fallback") == "fallback"


def test_project_file_is_merged_over_defaults(tmp_path):
    path = tmp_path / "project.yaml"
    path.write_text("project:\n  name: test\nhealth:\n  alpha: 0.005\n", encoding="utf-8")

    config = load_config(str(path))

    assert config.project_name == "test"
    assert config.get("health.alpha") == 0.005
    assert config.get("health.threshold") == 100
    assert config.base_dir == tmp_path.resolve()
    assert config.resolve_path("census.csv") == tmp_path.resolve() / "census.csv"


def test_json_project_file(tmp_path):
    path = tmp_path / "project.json"
    path.write_text(json.dumps({"simulation": {"max_ticks": 12}}), encoding="utf-8")

    assert Config(str(path)).max_ticks == 12


def test_unknown_schema_version_is_rejected(tmp_path):
    path = tmp_path / "project.yaml"
    path.write_text("schema_version: 99\n", encoding="utf-8")

    with pytest.raises(ConfigurationError):
        Config(str(path))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError):
        Config(str(tmp_path / "nope.yaml"))


def test_environment_seed_wins(monkeypatch):
    config = Config.from_dict({"simulation": {"seed": 5}})
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    assert config.seed == 5

    monkeypatch.setenv(SEED_ENV_VAR, "11")
    assert config.seed == 11

    monkeypatch.setenv(SEED_ENV_VAR, "eleven")
    with pytest.raises(ConfigurationError):
        _ = config.seed


def test_with_overrides_leaves_original_untouched():
    config = Config()
    changed = config.with_overrides({"health.alpha": 0.009, "pollution.scenario": "inc"})

    assert changed.get("health.alpha") == 0.009
    assert changed.get("pollution.scenario") == "inc"
    assert config.get("health.alpha") == pytest.approx(0.0043)
    assert config.get("pollution.scenario") == "bau"


def test_require_missing_value():
    with pytest.raises(ConfigurationError):
        Config().require("data.census")
