"""Pipeline configuration: key-value config files, environment overrides,
and CLI flag overrides, in that order of increasing precedence.

Config files are plain ``key = value`` lines; ``#`` starts a comment.
Environment variables use the ``PPGDN_`` prefix with upper-cased keys
(e.g. ``PPGDN_GAIN=2.5``).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

ENV_PREFIX = "PPGDN_"

TRANSLATOR_MODES = ("identity", "external_images")


@dataclass
class PipelineConfig:
    data_dir: str = ""
    traces_dir: str = ""
    out_dir: str = "out"
    weights: str = ""
    images_dir: str = ""
    gain: float = 1.0
    seed: int = 0
    translator: str = "identity"
    window_size: int = 256
    refractory_s: float = 0.33
    match_tol_s: float = 0.5
    rmse_mode: str = "beat_matched"
    segment_s: float = 120.0
    counts_per_g: float = 64.0
    strict: bool = False
    write_images: bool = True

    def __post_init__(self):
        if self.window_size != 256:
            raise ConfigError(f"window_size is fixed at 256, got {self.window_size}")
        if self.translator not in TRANSLATOR_MODES:
            raise ConfigError(
                f"translator must be one of {TRANSLATOR_MODES}, got {self.translator!r}"
            )
        if self.rmse_mode not in ("beat_matched", "hr_ref"):
            raise ConfigError(f"unknown rmse_mode {self.rmse_mode!r}")


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(key: str, value: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind in ("bool", bool):
            lowered = str(value).strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if kind in ("int", int):
            return int(value)
        if kind in ("float", float):
            return float(value)
        return str(value)
    except ValueError:
        raise ConfigError(f"config key {key}: cannot parse {value!r} as {kind}") from None


def parse_config_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"missing config file {path}")
    values = {}
    for line_num, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{line_num}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{line_num}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def load_config(path=None, *, env=None, overrides=None) -> PipelineConfig:
    """Merge defaults <- config file <- environment <- explicit overrides."""
    env = os.environ if env is None else env
    merged: dict = {}
    if path is not None:
        merged.update(parse_config_file(path))
    for key in _FIELD_TYPES:
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            merged[key] = env[env_key]
    coerced = {key: _coerce(key, value) for key, value in merged.items()}
    for key, value in (overrides or {}).items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        if value is not None:
            coerced[key] = value
    return PipelineConfig(**coerced)
