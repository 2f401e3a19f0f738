"""Run configuration and its TOML file format.

A config file has one table per concern; every key is optional and unknown
keys are rejected::

    [run]
    variant = "mixme"            # "sa" | "naive" | "mixme"
    n_iterations = 200
    batch_size = 256
    n_initial_solutions = 256    # defaults to batch_size
    seed = 7
    metrics_every = 1

    [env]
    name = "gait"                # "gait" | "arm"
    n_legs = 4                   # gait
    episode_length = 300         # gait
    gamma = 1.0                  # gait
    n_joints = 2                 # arm
    n_agents = 2                 # arm

    [env.constants]              # gait dynamics, see GaitConstants
    dt = 0.05

    [policy]
    hidden_dims = [64, 64]
    param_lower = -5.0
    param_upper = 5.0

    [variation]
    eta = 16.0
    p_mut = 0.01                 # omit for 1 / genome length
    sigma_iso = 0.01
    sigma_line = 0.1

    [grid]
    cells_per_dim = 10           # or one entry per descriptor axis
    lower = 0.0
    upper = 1.0

    [generalisation]
    dysfunction_leg = 0
    gravity_values = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]
    dysfunction_values = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    n_evals = 100

    [grid_search]
    sigma_iso = [0.0001, 0.001, 0.01, 0.1, 1.0]
    sigma_line = [0.0001, 0.001, 0.01, 0.1, 1.0]
    eta = [4, 8, 16, 32, 64, 128, 256]
    n_seeds = 3
"""

from __future__ import annotations

import dataclasses
import enum
import json
import sys
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from mixme.archive import GridConfig
from mixme.envs import ArmEnv, GaitConstants, GaitEnv
from mixme.variation import Variant, VariationConfig


class ConfigError(ValueError):
    pass


DEFAULT_SIGMA_GRID = (0.0001, 0.001, 0.01, 0.1, 1.0)
DEFAULT_ETA_GRID = (4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0)


@dataclass(frozen=True)
class EnvConfig:
    name: str = "gait"
    n_legs: int = 4
    episode_length: int = 300
    gamma: float = 1.0
    n_joints: int = 2
    n_agents: int = 2
    constants: GaitConstants = field(default_factory=GaitConstants)

    def __post_init__(self) -> None:
        if self.name not in ("gait", "arm"):
            raise ConfigError(f"unknown environment {self.name!r}; expected 'gait' or 'arm'")


@dataclass(frozen=True)
class PolicyConfig:
    hidden_dims: tuple[int, ...] = (64, 64)
    param_lower: float = -5.0
    param_upper: float = 5.0


@dataclass(frozen=True)
class GridSection:
    cells_per_dim: Union[int, tuple[int, ...]] = 10
    lower: float = 0.0
    upper: float = 1.0


@dataclass(frozen=True)
class GeneralisationConfig:
    dysfunction_leg: int = 0
    gravity_values: tuple[float, ...] = (0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)
    dysfunction_values: tuple[float, ...] = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    n_evals: int = 100


@dataclass(frozen=True)
class SearchSpace:
    sigma_iso: tuple[float, ...] = DEFAULT_SIGMA_GRID
    sigma_line: tuple[float, ...] = DEFAULT_SIGMA_GRID
    eta: tuple[float, ...] = DEFAULT_ETA_GRID
    n_seeds: int = 3

    def __post_init__(self) -> None:
        if not (self.sigma_iso and self.sigma_line and self.eta):
            raise ConfigError("grid-search space has an empty axis")
        if self.n_seeds < 1:
            raise ConfigError("n_seeds must be >= 1")

    @property
    def size(self) -> int:
        return len(self.sigma_iso) * len(self.sigma_line) * len(self.eta)


@dataclass(frozen=True)
class RunConfig:
    variant: Variant = Variant.MIX_ME
    n_iterations: int = 1000
    batch_size: int = 4096
    n_initial_solutions: Optional[int] = None
    seed: int = 0
    metrics_every: int = 1
    env: EnvConfig = field(default_factory=EnvConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    variation: VariationConfig = field(default_factory=VariationConfig)
    grid: GridSection = field(default_factory=GridSection)
    generalisation: GeneralisationConfig = field(default_factory=GeneralisationConfig)
    grid_search: SearchSpace = field(default_factory=SearchSpace)

    def __post_init__(self) -> None:
        if self.n_iterations < 0:
            raise ConfigError("n_iterations must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.n_initial_solutions is not None and self.n_initial_solutions < 1:
            raise ConfigError("n_initial_solutions must be >= 1")
        if self.metrics_every < 1:
            raise ConfigError("metrics_every must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @property
    def initial_count(self) -> int:
        return self.batch_size if self.n_initial_solutions is None else self.n_initial_solutions

    def build_env(self) -> Union[GaitEnv, ArmEnv]:
        e = self.env
        if e.name == "gait":
            env: Union[GaitEnv, ArmEnv] = GaitEnv(
                n_legs=e.n_legs,
                episode_length=e.episode_length,
                constants=e.constants,
                hidden_dims=self.policy.hidden_dims,
                param_bounds=(self.policy.param_lower, self.policy.param_upper),
                gamma=e.gamma,
            )
        else:
            env = ArmEnv(n_joints=e.n_joints, n_agents=e.n_agents)
        return env.as_single_agent() if self.variant is Variant.SINGLE_AGENT else env

    def grid_config(self, n_axes: int) -> GridConfig:
        cells = self.grid.cells_per_dim
        dims = (cells,) * n_axes if isinstance(cells, int) else tuple(cells)
        if len(dims) != n_axes:
            raise ConfigError(f"grid has {len(dims)} axes but the descriptor has {n_axes}")
        return GridConfig(dims, (self.grid.lower,) * n_axes, (self.grid.upper,) * n_axes)


# -- (de)serialisation -------------------------------------------------------


def _coerce(value: Any, tp: Any, where: str) -> Any:
    origin = typing.get_origin(tp)
    if origin is Union:
        args = typing.get_args(tp)
        if value is None and type(None) in args:
            return None
        errors = []
        for arg in args:
            if arg is type(None):
                continue
            try:
                return _coerce(value, arg, where)
            except ConfigError as exc:
                errors.append(str(exc))
        raise ConfigError(f"{where}: value {value!r} matches none of the allowed types")
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected a table")
        return _build(tp, value, where)
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        try:
            return tp(value)
        except ValueError:
            allowed = ", ".join(repr(m.value) for m in tp)
            raise ConfigError(f"{where}: {value!r} is not one of {allowed}") from None
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: expected a list")
        (item,) = [a for a in typing.get_args(tp) if a is not Ellipsis]
        return tuple(_coerce(v, item, f"{where}[{i}]") for i, v in enumerate(value))
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    raise TypeError(f"unsupported config type {tp!r}")


def _build(cls: type, table: dict, where: str) -> Any:
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(table) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    kwargs = {k: _coerce(v, hints[k], f"{where}.{k}") for k, v in table.items()}
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


_SECTIONS = ("run", "env", "policy", "variation", "grid", "generalisation", "grid_search")


def config_from_dict(doc: dict) -> RunConfig:
    unknown = sorted(set(doc) - set(_SECTIONS))
    if unknown:
        raise ConfigError(f"unknown section(s) {', '.join(unknown)}")
    flat = dict(doc.get("run", {}))
    for section in _SECTIONS[1:]:
        if section in doc:
            flat[section] = doc[section]
    return _build(RunConfig, flat, "config")


def load_config(path: Union[str, Path]) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(doc)


def _plain(value: Any) -> Any:
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items() if v is not None}
    return value


def config_to_dict(config: RunConfig) -> dict:
    """Inverse of :func:`config_from_dict`; ``None`` entries are omitted."""
    raw = {f.name: getattr(config, f.name) for f in dataclasses.fields(config)}
    doc: dict = {"run": {}}
    for name, value in raw.items():
        if dataclasses.is_dataclass(value):
            doc[name] = _plain(dataclasses.asdict(value))
        elif value is not None:
            doc["run"][name] = _plain(value)
    return doc


def config_to_json(config: RunConfig) -> str:
    return json.dumps(config_to_dict(config), indent=1) + "\n"
