"""Shared environment types for cooperative multi-agent tasks.

Environments follow the Dec-POMDP shape: N agents, each with its own
observation and action space, a shared joint reward, and a discount factor.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Optional, Protocol, Sequence

import numpy as np

from mixme.policy import AgentSpec, TeamGenome


@dataclass(frozen=True)
class EnvSpec:
    n_agents: int
    obs_dims: tuple[int, ...]
    action_dims: tuple[int, ...]
    n_feet: int
    full_obs_dim: int
    episode_length: int = 300
    gamma: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "obs_dims", tuple(int(d) for d in self.obs_dims))
        object.__setattr__(self, "action_dims", tuple(int(d) for d in self.action_dims))
        if self.n_agents < 1:
            raise ValueError("need at least one agent")
        if len(self.obs_dims) != self.n_agents or len(self.action_dims) != self.n_agents:
            raise ValueError("obs_dims and action_dims need one entry per agent")
        if self.episode_length < 1:
            raise ValueError("episode_length must be >= 1")
        if self.n_feet < 1:
            raise ValueError("descriptor needs at least one dimension")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")

    @property
    def descriptor_dim(self) -> int:
        return self.n_feet


def single_agent_wrapper(spec: EnvSpec) -> EnvSpec:
    """One agent that sees the full state and emits the joint action."""
    return replace(
        spec,
        n_agents=1,
        obs_dims=(spec.full_obs_dim,),
        action_dims=(sum(spec.action_dims),),
    )


@dataclass(frozen=True)
class EnvModifiers:
    gravity_multiplier: float = 1.0
    dysfunctional_leg: Optional[int] = None
    dysfunction_coefficient: float = 1.0

    def __post_init__(self) -> None:
        if not self.gravity_multiplier > 0:
            raise ValueError("gravity_multiplier must be positive")
        if not 0.0 <= self.dysfunction_coefficient <= 1.0:
            raise ValueError("dysfunction_coefficient must lie in [0, 1]")
        if self.dysfunctional_leg is not None and self.dysfunctional_leg < 0:
            raise ValueError("dysfunctional_leg must be non-negative")

    def leg_coefficients(self, n_legs: int) -> np.ndarray:
        coef = np.ones(n_legs)
        if self.dysfunctional_leg is not None:
            if not 0 <= self.dysfunctional_leg < n_legs:
                raise ValueError(f"dysfunctional_leg {self.dysfunctional_leg} out of range for {n_legs} legs")
            coef[self.dysfunctional_leg] = self.dysfunction_coefficient
        return coef


NEUTRAL = EnvModifiers()


@dataclass(frozen=True, eq=False)
class StepResult:
    next_state: Any
    observations: list[np.ndarray]
    reward: float
    done: bool
    foot_contacts: np.ndarray


@dataclass(frozen=True, eq=False)
class EvalResult:
    """Outcome of one episode.

    ``contacts`` (steps x feet) and ``rewards`` are only filled in when the
    rollout was recorded.
    """

    fitness: float
    descriptor: np.ndarray
    steps_executed: int
    operator_tag: Optional[str] = None
    contacts: Optional[np.ndarray] = None
    rewards: Optional[np.ndarray] = None

    def same_outcome(self, other: "EvalResult") -> bool:
        return (
            self.fitness == other.fitness
            and self.steps_executed == other.steps_executed
            and np.array_equal(self.descriptor, other.descriptor)
        )


def behaviour_descriptor(contact_history: np.ndarray) -> np.ndarray:
    """Fraction of executed steps each foot spends on the ground."""
    history = np.asarray(contact_history, dtype=bool)
    if history.ndim != 2 or history.shape[0] < 1:
        raise ValueError(f"contact history must be (steps >= 1, feet), got shape {history.shape}")
    return history.sum(axis=0) / history.shape[0]


class Environment(Protocol):
    name: str
    spec: EnvSpec
    deterministic: bool

    def agent_specs(self) -> tuple[AgentSpec, ...]: ...

    def evaluate(
        self,
        teams: Sequence[TeamGenome],
        modifiers: EnvModifiers = NEUTRAL,
        record: bool = False,
    ) -> list[EvalResult]: ...
