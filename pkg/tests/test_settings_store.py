import json

import pytest

import settings_store
from settings_store import (
    ConfigError,
    RunConfig,
    config_path,
    load_run_config,
    load_run_config_from_env,
    load_settings,
    merge_settings,
    read_config_file,
    run_config_from_dict,
    save_settings,
)


@pytest.fixture(autouse=True)
def _isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for var in list(settings_store.ENV_KEYS) + [settings_store.CONFIG_ENV]:
        monkeypatch.delenv(var, raising=False)


def test_defaults():
    cfg = load_run_config()
    assert cfg == RunConfig()
    assert cfg.to_dict()["precision"] == 256


def test_layering_file_env_flags(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# knobs\nprecision=128\nseed=3\n\ntruncation = 10\n", encoding="utf-8")
    env = {"HJ_SEED": "11", "HJ_NODES": "64"}
    cfg = load_run_config(str(path), env=env, overrides={"nodes": 32, "truncation": None})
    assert cfg.precision == 128
    assert cfg.seed == 11
    assert cfg.truncation == 10
    assert cfg.nodes == 32


def test_config_env_variable_selects_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"precision": 64, "human": "yes"}), encoding="utf-8")
    cfg = load_run_config(env={"HJ_CONFIG": str(path)})
    assert cfg.precision == 64
    assert cfg.human is True


def test_config_path_order(tmp_path):
    assert config_path(None, env={}) is None
    assert config_path("a.cfg", env={"HJ_CONFIG": "b.cfg"}) == "a.cfg"
    assert config_path(None, env={"HJ_CONFIG": " b.cfg "}) == "b.cfg"
    save_settings({"seed": 5})
    assert config_path(None, env={}) == settings_store.DEFAULT_SETTINGS_PATH


def test_env_reading_skips_blanks():
    assert load_run_config_from_env({"HJ_PRECISION": "  ", "HJ_TRUNCATION": "8", "OTHER": "1"}) == {"truncation": "8"}


def test_unknown_and_invalid_values():
    with pytest.raises(ConfigError):
        run_config_from_dict({"colour": "red"})
    with pytest.raises(ConfigError):
        run_config_from_dict({"seed": "seven"})
    with pytest.raises(ConfigError):
        run_config_from_dict({"seed": True})
    with pytest.raises(ConfigError):
        run_config_from_dict({"human": "maybe"})
    assert run_config_from_dict({"output": "  "}).output is None
    assert run_config_from_dict({"updated_at": "x"}) == RunConfig()


@pytest.mark.parametrize(
    "changes",
    [
        {"nodes": 63},
        {"nodes": 2},
        {"precision": 8},
        {"precision": 512, "max_precision": 256},
        {"truncation": 0},
        {"verbosity": -1},
    ],
)
def test_validation_rejects(changes):
    with pytest.raises(ConfigError):
        run_config_from_dict(changes)


def test_read_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(str(tmp_path / "missing.cfg"))
    bad = tmp_path / "bad.cfg"
    bad.write_text("precision 64\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_config_file(str(bad))
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_config_file(str(listed))
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_config_file(str(broken))
    empty = tmp_path / "empty.json"
    empty.write_text("", encoding="utf-8")
    assert read_config_file(str(empty)) == {}


def test_save_and_merge_settings(tmp_path):
    path = str(tmp_path / "out" / "settings.json")
    assert load_settings(path) == {}
    saved = save_settings({"precision": 128}, path=path)
    assert "updated_at" in saved
    merged = merge_settings({"seed": 9}, path=path)
    assert merged["precision"] == 128 and merged["seed"] == 9
    on_disk = load_settings(path)
    assert on_disk["seed"] == 9
    assert load_run_config(path, env={}).precision == 128
    with pytest.raises(ConfigError):
        merge_settings({"nodes": 3}, path=path)
    assert load_settings(path)["seed"] == 9


def test_save_key_value_settings(tmp_path):
    path = str(tmp_path / "settings.cfg")
    save_settings({"truncation": 12, "output": None}, path=path)
    loaded = load_settings(path)
    assert loaded["truncation"] == "12"
    assert loaded["output"] == ""
    assert load_run_config(path, env={}).truncation == 12
