"""Configuration files and flag merging.

Config files are flat key = value text: one assignment per line, `#` starts
a comment, keys mirror the SimConfig / SweepConfig field names exactly.
Grid fields (alpha_values, beta_values) take comma-separated numbers.
Command-line flags override file values, which override defaults. Unknown
keys and out-of-range values are rejected with the offending key named.
"""

from __future__ import annotations

from dataclasses import fields
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .experiment import SimConfig, SweepConfig

_SIM_FIELDS = {f.name: f.type for f in fields(SimConfig)}
_INT_KEYS = {"n_agents", "n_edges", "steps", "sample_interval", "bin_count", "seed",
             "runs_per_cell", "base_seed"}
_FLOAT_KEYS = {"alpha", "beta", "sigma", "init_sigma"}
_STR_KEYS = {"influence_mode"}
_LIST_KEYS = {"alpha_values", "beta_values"}


def _parse_scalar(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc
    return raw


def _parse_value(key: str, raw: str):
    if key in _LIST_KEYS:
        items = [part.strip() for part in raw.split(",") if part.strip()]
        if not items:
            raise ConfigError(f"{key}: expected a comma-separated list of numbers")
        try:
            return [float(part) for part in items]
        except ValueError as exc:
            raise ConfigError(f"{key}: expected numbers, got {raw!r}") from exc
    return _parse_scalar(key, raw)


def read_config_file(path) -> dict:
    """Parse a flat key = value file into a raw {key: parsed value} dict."""
    values = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if not raw:
            raise ConfigError(f"{path}:{lineno}: empty value for key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw)
    return values


def _take(values: dict, allowed: set) -> dict:
    unknown = set(values) - allowed
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    return values


def parse_sim_config(path=None, overrides: Optional[dict] = None) -> SimConfig:
    """Build a SimConfig from an optional file plus flag overrides."""
    values = read_config_file(path) if path else {}
    _take(values, set(_SIM_FIELDS))
    if overrides:
        for key, val in overrides.items():
            if val is None:
                continue
            if key not in _SIM_FIELDS:
                raise ConfigError(f"unknown config key: {key}")
            values[key] = val
    config = SimConfig(**values)
    config.validate()
    return config


def parse_sweep_config(path=None, overrides: Optional[dict] = None) -> SweepConfig:
    """Build a SweepConfig from an optional file plus flag overrides.

    Template fields (steps, sigma, ...) are given flat, alongside the sweep's
    own keys; alpha/beta of the template are controlled per cell by the grid.
    A scalar `alpha` or `beta` override collapses that grid axis to one value.
    """
    values = read_config_file(path) if path else {}
    sweep_keys = {"alpha_values", "beta_values", "runs_per_cell", "base_seed"}
    template_keys = set(_SIM_FIELDS) - {"alpha", "beta", "seed"}
    _take(values, sweep_keys | template_keys)
    if overrides:
        for key, val in overrides.items():
            if val is None:
                continue
            if key == "alpha":
                values["alpha_values"] = [float(val)]
            elif key == "beta":
                values["beta_values"] = [float(val)]
            elif key == "seed":
                values["base_seed"] = int(val)
            elif key in sweep_keys | template_keys:
                values[key] = val
            else:
                raise ConfigError(f"unknown config key: {key}")
    sweep_values = {k: values[k] for k in sweep_keys if k in values}
    template_values = {k: v for k, v in values.items() if k in template_keys}
    sweep = SweepConfig(template=SimConfig(**template_values), **sweep_values)
    sweep.validate()
    return sweep
