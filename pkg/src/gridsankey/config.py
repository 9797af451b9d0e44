"""Service configuration: TOML file plus GRIDSANKEY_* environment overrides.

Precedence, lowest to highest: built-in defaults, config file, environment,
explicit overrides (CLI flags).  Relative paths in the file are resolved
against the file's directory; paths from the environment or overrides are
resolved against the working directory.

File keys (all optional)::

    data_dir = "data"            # one sub-directory per collection
    static_dir = "frontend/dist" # UI bundle to host at /
    host = "127.0.0.1"
    port = 8000
    alpha = 0.05                 # Dunnett significance level
    rbp_p = 0.8                  # RBP persistence for ingest (manifest wins)
    mc_replicates = 200000       # Monte Carlo replicates for critical values
    mc_seed = 42
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError

ENV_PREFIX = "GRIDSANKEY_"

_DEFAULTS = {
    "data_dir": "data",
    "static_dir": None,
    "host": "127.0.0.1",
    "port": 8000,
    "alpha": 0.05,
    "rbp_p": None,
    "mc_replicates": 200_000,
    "mc_seed": 42,
}


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: Path
    static_dir: Path | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    alpha: float = 0.05
    rbp_p: float | None = None
    mc_replicates: int = 200_000
    mc_seed: int = 42


def _coerce(key: str, value):
    try:
        if key in ("port", "mc_replicates", "mc_seed"):
            return int(value)
        if key in ("alpha", "rbp_p"):
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"config value {key} = {value!r} is not numeric", field=key) from None
    if key in ("data_dir", "static_dir", "host"):
        return str(value)
    raise ConfigError(f"unknown config key {key!r}", field=key)


def load_config(
    path: str | Path | None = None,
    *,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, object] | None = None,
) -> ServiceConfig:
    values = dict(_DEFAULTS)
    base_dir = Path(".")

    if path is not None:
        path = Path(path)
        try:
            raw = tomllib.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
        base_dir = path.parent
        for key, value in raw.items():
            if key not in _DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}", field=key)
            values[key] = _coerce(key, value)
        # resolve file-relative paths before env/flag layers apply
        for key in ("data_dir", "static_dir"):
            if raw.get(key) is not None:
                values[key] = str((base_dir / str(raw[key])).resolve())

    if env is None:
        import os

        env = os.environ
    for key in _DEFAULTS:
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            values[key] = _coerce(key, env[env_key])

    for key, value in (overrides or {}).items():
        if key not in _DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}", field=key)
        if value is not None:
            values[key] = _coerce(key, value)

    if not 1 <= int(values["port"]) <= 65535:
        raise ConfigError(f"port {values['port']} out of range", field="port")
    if not 0.0 < float(values["alpha"]) < 1.0:
        raise ConfigError("alpha must lie in (0, 1)", field="alpha")
    if values["rbp_p"] is not None and not 0.0 < float(values["rbp_p"]) < 1.0:
        raise ConfigError("rbp_p must lie in (0, 1)", field="rbp_p")
    if int(values["mc_replicates"]) < 1:
        raise ConfigError("mc_replicates must be >= 1", field="mc_replicates")

    return ServiceConfig(
        data_dir=Path(values["data_dir"]),
        static_dir=Path(values["static_dir"]) if values["static_dir"] else None,
        host=str(values["host"]),
        port=int(values["port"]),
        alpha=float(values["alpha"]),
        rbp_p=float(values["rbp_p"]) if values["rbp_p"] is not None else None,
        mc_replicates=int(values["mc_replicates"]),
        mc_seed=int(values["mc_seed"]),
    )
