"""Per-agent policy parameters and team genomes.

A team genome is an ordered tuple of per-agent flat parameter vectors. Two
kinds of agent parameterisation exist:

* :class:`MlpSpec` -- a fully connected tanh network. The flat layout is,
  layer by layer, the weight matrix of shape ``(fan_in, fan_out)`` in
  row-major order followed by the bias vector.
* :class:`VectorSpec` -- a raw bounded vector (e.g. joint angles for the
  planar arm benchmark).

Policy evaluation runs in float32 with a rational tanh approximation
(absolute error below 4e-7) so that the rollout kernels vectorise; the same
compiled routine serves :func:`forward` and the batched rollouts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from mixme._kernels import mlp_forward

Bounds = tuple[float, float]

@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    output_dim: int
    hidden_dims: tuple[int, ...] = (64, 64)
    bounds: Bounds = (-5.0, 5.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        object.__setattr__(self, "bounds", (float(self.bounds[0]), float(self.bounds[1])))
        if min(self.layer_dims) < 1:
            raise ValueError(f"all layer sizes must be >= 1, got {self.layer_dims}")
        if not self.bounds[0] < self.bounds[1]:
            raise ValueError(f"lower bound must be below upper bound, got {self.bounds}")

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_dims, self.output_dim)

    @property
    def param_count(self) -> int:
        dims = self.layer_dims
        return sum((dims[i] + 1) * dims[i + 1] for i in range(len(dims) - 1))


@dataclass(frozen=True)
class VectorSpec:
    """A bounded raw parameter vector with no network structure."""

    size: int
    bounds: Bounds

    def __post_init__(self) -> None:
        object.__setattr__(self, "bounds", (float(self.bounds[0]), float(self.bounds[1])))
        if self.size < 1:
            raise ValueError(f"size must be >= 1, got {self.size}")
        if not self.bounds[0] < self.bounds[1]:
            raise ValueError(f"lower bound must be below upper bound, got {self.bounds}")

    @property
    def param_count(self) -> int:
        return self.size


AgentSpec = Union[MlpSpec, VectorSpec]


@dataclass(frozen=True, eq=False)
class AgentParams:
    """One agent's parameters. ``theta`` is stored read-only."""

    spec: AgentSpec
    theta: np.ndarray

    def __post_init__(self) -> None:
        theta = np.array(self.theta, dtype=np.float64)
        if theta.shape != (self.spec.param_count,):
            raise ValueError(f"expected {self.spec.param_count} parameters, got shape {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("parameters must be finite")
        lo, hi = self.spec.bounds
        if theta.size and (theta.min() < lo or theta.max() > hi):
            raise ValueError(f"parameters outside bounds {self.spec.bounds}")
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AgentParams):
            return NotImplemented
        return self.spec == other.spec and self.theta.tobytes() == other.theta.tobytes()

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class TeamGenome:
    agents: tuple[AgentParams, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "agents", tuple(self.agents))

    def __len__(self) -> int:
        return len(self.agents)

    def __iter__(self) -> Iterator[AgentParams]:
        return iter(self.agents)

    def __getitem__(self, i: int) -> AgentParams:
        return self.agents[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TeamGenome):
            return NotImplemented
        return len(self) == len(other) and all(a == b for a, b in zip(self, other))

    __hash__ = None  # type: ignore[assignment]

    @property
    def specs(self) -> tuple[AgentSpec, ...]:
        return tuple(a.spec for a in self.agents)

    @classmethod
    def from_arrays(cls, specs: Sequence[AgentSpec], arrays: Sequence[np.ndarray]) -> "TeamGenome":
        if len(specs) != len(arrays):
            raise ValueError(f"{len(specs)} specs but {len(arrays)} parameter arrays")
        return cls(tuple(AgentParams(s, a) for s, a in zip(specs, arrays)))


def init_random(spec: AgentSpec, rng: np.random.Generator) -> AgentParams:
    """Draw initial parameters.

    MLP weights are uniform in ``±1/sqrt(fan_in)`` per layer with zero
    biases; raw vectors are uniform over their bounds.
    """
    if isinstance(spec, VectorSpec):
        return AgentParams(spec, rng.uniform(spec.bounds[0], spec.bounds[1], spec.size))
    parts = []
    dims = spec.layer_dims
    for n_in, n_out in zip(dims[:-1], dims[1:]):
        limit = 1.0 / math.sqrt(n_in)
        parts.append(rng.uniform(-limit, limit, n_in * n_out))
        parts.append(np.zeros(n_out))
    theta = np.clip(np.concatenate(parts), *spec.bounds)
    return AgentParams(spec, theta)


def init_team(specs: Sequence[AgentSpec], rng: np.random.Generator) -> TeamGenome:
    return TeamGenome(tuple(init_random(s, rng) for s in specs))


def forward(params: AgentParams, obs: np.ndarray) -> np.ndarray:
    """Map one observation to an action; every component lies in (-1, 1)."""
    spec = params.spec
    if not isinstance(spec, MlpSpec):
        raise TypeError("forward needs MLP parameters")
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape != (spec.input_dim,):
        raise ValueError(f"observation must have shape ({spec.input_dim},), got {obs.shape}")
    if not np.all(np.isfinite(obs)):
        raise ValueError("observation must be finite")
    dims = np.asarray(spec.layer_dims, dtype=np.int64)
    width = int(dims.max())
    out = mlp_forward(
        params.theta.astype(np.float32),
        dims,
        obs.astype(np.float32),
        np.empty(width, np.float32),
        np.empty(width, np.float32),
    )
    return out.astype(np.float64)


def flatten(team: TeamGenome) -> np.ndarray:
    if len(team) == 0:
        return np.empty(0)
    return np.concatenate([a.theta for a in team])


def unflatten(v: np.ndarray, specs: Sequence[AgentSpec]) -> TeamGenome:
    v = np.asarray(v, dtype=np.float64)
    sizes = [s.param_count for s in specs]
    if v.shape != (sum(sizes),):
        raise ValueError(f"flat vector of length {sum(sizes)} expected, got shape {v.shape}")
    cuts = np.cumsum(sizes)[:-1]
    return TeamGenome.from_arrays(specs, np.split(v, cuts) if specs else [])
