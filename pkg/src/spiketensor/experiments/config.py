"""Flat JSON experiment configuration with per-profile defaults.

A config file is a single JSON object. ``experiment`` is required; every
other key is optional and falls back to the selected profile. Unknown keys
are rejected so that typos fail loudly.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Optional

EXPERIMENTS = ("esd", "alignment_sweep", "hooi_scaling", "predict")
N_CONVENTIONS = ("sum_dims", "first_dim", "custom")
PROFILES = ("paper", "small")
SEED_ENV = "TENSORLAB_SEED"

DEFAULT_OMEGA_GRID = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0, 25.0, 30.0, 40.0]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    dims: list = field(default_factory=lambda: [300, 500, 700])
    ranks: list = field(default_factory=lambda: [3, 4, 5])
    n_convention: str = "sum_dims"
    n_param: Optional[float] = None
    omega: float = 15.0
    omega_grid: list = field(default_factory=lambda: list(DEFAULT_OMEGA_GRID))
    n_grid: list = field(default_factory=lambda: [120, 240, 480, 960])
    dim_ratios: list = field(default_factory=lambda: [1 / 6, 2 / 6, 3 / 6])
    trials: int = 10
    base_seed: int = 20240601
    tol: float = 1e-8
    max_iter: int = 100
    scheme: str = "gauss_seidel"
    epsilon_outlier: float = 0.3
    c_universal: float = 1.0
    delta: float = 0.01
    bins: int = 50
    s2: list = field(default_factory=list)
    output_path: Optional[str] = None

    def n_for(self, dims) -> float:
        """The N parameter for the given dimensions under this config's convention."""
        if self.n_convention == "sum_dims":
            return float(sum(dims))
        if self.n_convention == "first_dim":
            return float(dims[0])
        return float(self.n_param)

    def to_dict(self) -> dict:
        return asdict(self)


_PROFILE_DEFAULTS: dict[str, dict[str, dict[str, Any]]] = {
    "paper": {
        "esd": {"dims": [300, 500, 700], "ranks": [3, 4, 5], "omega": 15.0, "trials": 10},
        "alignment_sweep": {"dims": [100, 200, 300], "ranks": [3, 4, 5], "trials": 10},
        "hooi_scaling": {"ranks": [3, 4, 5], "omega": 10.0, "n_grid": [120, 240, 480, 960], "trials": 10},
        "predict": {"dims": [300, 500, 700], "ranks": [3, 4, 5]},
    },
    "small": {
        "esd": {"dims": [60, 100, 140], "ranks": [3, 4, 5], "omega": 15.0, "trials": 5},
        "alignment_sweep": {
            "dims": [40, 80, 120],
            "ranks": [3, 4, 5],
            "trials": 5,
            "omega_grid": [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
        },
        "hooi_scaling": {"ranks": [3, 4, 5], "omega": 10.0, "n_grid": [60, 120, 240], "trials": 5},
        "predict": {"dims": [300, 500, 700], "ranks": [3, 4, 5]},
    },
}

_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def _as_int_list(key: str, value) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key} must be a non-empty list")
    try:
        out = [int(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must contain integers") from exc
    if any(float(v) != o for v, o in zip(value, out)):
        raise ConfigError(f"{key} must contain integers")
    return out


def _as_float_list(key: str, value, allow_empty: bool = False) -> list:
    if not isinstance(value, list) or (not value and not allow_empty):
        raise ConfigError(f"{key} must be a non-empty list")
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must contain numbers") from exc


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {cfg.experiment!r}")
    if cfg.n_convention not in N_CONVENTIONS:
        raise ConfigError(f"n_convention must be one of {N_CONVENTIONS}")
    if cfg.n_convention == "custom" and (cfg.n_param is None or cfg.n_param <= 0):
        raise ConfigError("n_convention 'custom' needs a positive n_param")
    if cfg.scheme not in ("gauss_seidel", "jacobi"):
        raise ConfigError("scheme must be 'gauss_seidel' or 'jacobi'")
    if len(cfg.dims) != len(cfg.ranks):
        raise ConfigError("dims and ranks must have the same length")
    if cfg.experiment != "hooi_scaling":
        for n, r in zip(cfg.dims, cfg.ranks):
            if not 1 <= r <= n:
                raise ConfigError(f"rank {r} is not in [1, {n}]")
    if cfg.trials < 1:
        raise ConfigError("trials must be at least 1")
    if not 0 <= cfg.base_seed < 2**64:
        raise ConfigError("base_seed must be an unsigned 64-bit integer")
    if cfg.omega < 0 or any(w < 0 for w in cfg.omega_grid):
        raise ConfigError("omega values must be non-negative")
    if cfg.tol <= 0 or cfg.max_iter < 1:
        raise ConfigError("tol must be positive and max_iter at least 1")
    if cfg.epsilon_outlier <= 0 or cfg.c_universal <= 0 or not 0 < cfg.delta < 1:
        raise ConfigError("epsilon_outlier and c_universal must be positive, delta in (0, 1)")
    if cfg.bins < 1:
        raise ConfigError("bins must be positive")
    if cfg.experiment == "hooi_scaling":
        if len(cfg.dim_ratios) != len(cfg.ranks) or any(x <= 0 for x in cfg.dim_ratios):
            raise ConfigError("dim_ratios must be positive, one per mode")
        for n_param in cfg.n_grid:
            for n, r in zip(scaled_dims(cfg.dim_ratios, n_param), cfg.ranks):
                if not 1 <= r <= n:
                    raise ConfigError(f"N={n_param} gives dimension {n} below rank {r}")
    return cfg


def scaled_dims(ratios, n_param) -> list:
    return [max(1, int(round(x * n_param))) for x in ratios]


def from_mapping(data: dict, profile: str = "paper", seed: Optional[int] = None) -> ExperimentConfig:
    """Build a validated config from a mapping, profile defaults and seed overrides.

    Seed precedence: explicit ``seed`` argument, then the ``TENSORLAB_SEED``
    environment variable, then the mapping's ``base_seed``.
    """
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "experiment" not in data:
        raise ConfigError("config must name an experiment")
    if profile not in PROFILES:
        raise ConfigError(f"profile must be one of {PROFILES}")
    experiment = data["experiment"]
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")

    merged: dict[str, Any] = dict(_PROFILE_DEFAULTS[profile][experiment])
    merged.update(data)

    env_seed = os.environ.get(SEED_ENV)
    if seed is not None:
        merged["base_seed"] = seed
    elif env_seed not in (None, ""):
        try:
            merged["base_seed"] = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from exc

    kwargs: dict[str, Any] = {}
    for key, value in merged.items():
        if key in ("dims", "ranks", "n_grid"):
            kwargs[key] = _as_int_list(key, value)
        elif key in ("omega_grid", "dim_ratios"):
            kwargs[key] = _as_float_list(key, value)
        elif key == "s2":
            kwargs[key] = _as_float_list(key, value, allow_empty=True)
        elif key in ("trials", "max_iter", "bins", "base_seed"):
            if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
                raise ConfigError(f"{key} must be an integer")
            kwargs[key] = int(value)
        elif key in ("omega", "tol", "epsilon_outlier", "c_universal", "delta"):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key} must be a number")
            kwargs[key] = float(value)
        elif key == "n_param":
            kwargs[key] = None if value is None else float(value)
        else:
            kwargs[key] = value
    return validate(ExperimentConfig(**kwargs))


def load_config(path: str, profile: str = "paper", seed: Optional[int] = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return from_mapping(data, profile=profile, seed=seed)


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return validate(replace(cfg, **changes))
