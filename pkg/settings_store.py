"""
settings_store.py

RunConfig: run-wide knobs (seed, precision, truncation, quadrature nodes,
output). Layering, lowest to highest:

  built-in defaults < config file < environment (HJ_*) < command-line flags

Config files ending in .json hold one JSON object; any other file holds
`key=value` lines (`#` comments and blank lines are skipped).
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional

from report_io import ensure_dir, utc_now


DEFAULT_SETTINGS_PATH = "out/hj_settings.json"
CONFIG_ENV = "HJ_CONFIG"

ENV_KEYS = {
    "HJ_PRECISION": "precision",
    "HJ_SEED": "seed",
    "HJ_TRUNCATION": "truncation",
    "HJ_NODES": "nodes",
}

# written by save_settings, never a setting itself
_BOOKKEEPING_KEYS = {"updated_at"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 7
    precision: int = 256
    max_precision: int = 4096
    truncation: int = 24
    nodes: int = 512
    output: Optional[str] = None
    verbosity: int = 0
    human: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


_FIELD_NAMES = [f.name for f in fields(RunConfig)]


def _as_int(key: str, value: Any) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"Invalid {key}: {value!r} is not an integer")
    try:
        return int(str(value).strip())
    except ValueError:
        raise ConfigError(f"Invalid {key}: {value!r} is not an integer") from None


def _as_bool(key: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"Invalid {key}: {value!r} is not a boolean")


def _coerce(key: str, value: Any) -> Any:
    if key == "output":
        text = "" if value is None else str(value).strip()
        return text or None
    if key == "human":
        return _as_bool(key, value)
    return _as_int(key, value)


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.precision < 16:
        raise ConfigError(f"Invalid precision: {cfg.precision} (need at least 16 bits)")
    if cfg.max_precision < cfg.precision:
        raise ConfigError(f"Invalid max_precision: {cfg.max_precision} is below precision {cfg.precision}")
    if cfg.truncation < 1:
        raise ConfigError(f"Invalid truncation: {cfg.truncation} (need at least 1)")
    if cfg.nodes < 4 or cfg.nodes % 2:
        raise ConfigError(f"Invalid nodes: {cfg.nodes} (need an even count >= 4)")
    if cfg.verbosity < 0:
        raise ConfigError(f"Invalid verbosity: {cfg.verbosity}")
    return cfg


def run_config_from_dict(d: Mapping[str, Any], base: Optional[RunConfig] = None) -> RunConfig:
    """Apply a partial mapping on top of `base` (defaults when omitted)."""
    unknown = [k for k in d if k not in _FIELD_NAMES and k not in _BOOKKEEPING_KEYS]
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(sorted(unknown))}")
    changes = {k: _coerce(k, v) for k, v in d.items() if k in _FIELD_NAMES}
    return _validate(replace(base or RunConfig(), **changes))


def read_config_file(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigError(f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    if path.endswith(".json"):
        try:
            data = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")
        return data

    out: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_run_config_from_env(env: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    env = os.environ if env is None else env
    out: Dict[str, Any] = {}
    for var, key in ENV_KEYS.items():
        value = (env.get(var) or "").strip()
        if value:
            out[key] = value
    return out


def config_path(explicit: Optional[str] = None, env: Optional[Mapping[str, str]] = None) -> Optional[str]:
    """--config wins, then HJ_CONFIG, then the default file if it exists."""
    env = os.environ if env is None else env
    if explicit:
        return explicit
    from_env = (env.get(CONFIG_ENV) or "").strip()
    if from_env:
        return from_env
    return DEFAULT_SETTINGS_PATH if os.path.exists(DEFAULT_SETTINGS_PATH) else None


def load_run_config(
    path: Optional[str] = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    cfg = RunConfig()
    file_path = config_path(path, env)
    if file_path:
        cfg = run_config_from_dict(read_config_file(file_path), cfg)
    cfg = run_config_from_dict(load_run_config_from_env(env), cfg)
    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    return run_config_from_dict(flags, cfg)


# ----------------------------
# Persisted defaults
# ----------------------------


def load_settings(path: str = DEFAULT_SETTINGS_PATH) -> Dict[str, Any]:
    if not os.path.exists(path):
        return {}
    return read_config_file(path)


def save_settings(settings: Dict[str, Any], path: str = DEFAULT_SETTINGS_PATH) -> Dict[str, Any]:
    run_config_from_dict(settings)
    ensure_dir(os.path.dirname(path))
    payload = dict(settings)
    payload["updated_at"] = utc_now()
    with open(path, "w", encoding="utf-8") as f:
        if path.endswith(".json"):
            json.dump(payload, f, ensure_ascii=False, indent=2)
        else:
            for k, v in payload.items():
                f.write(f"{k}={'' if v is None else v}\n")
    return payload


def merge_settings(partial: Dict[str, Any], path: str = DEFAULT_SETTINGS_PATH) -> Dict[str, Any]:
    cur = load_settings(path=path)
    out = dict(cur)
    for k, v in partial.items():
        out[k] = v
    return save_settings(out, path=path)
