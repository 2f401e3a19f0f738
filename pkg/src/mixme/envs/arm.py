"""Planar arm benchmark with a closed-form evaluation.

An arm of ``L`` links of length ``1/L`` has its joint angles split
contiguously across the agents. Fitness is the negated standard deviation of
the joint angles, and the descriptor is the end-effector position mapped
from ``[-1, 1]^2`` to ``[0, 1]^2``. There is no rollout, which makes the
task cheap enough for brute-force archive oracles.

Under a leg-dysfunction modifier the realised angle of the chosen joint is
the commanded angle times the dysfunction coefficient; gravity has no
effect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mixme.envs.base import NEUTRAL, EnvModifiers, EnvSpec, EvalResult
from mixme.policy import TeamGenome, VectorSpec

ANGLE_BOUNDS = (-math.pi, math.pi)


def forward_kinematics(angles: np.ndarray) -> np.ndarray:
    """End-effector ``(x, y)`` for angle rows of shape ``(..., L)``."""
    angles = np.asarray(angles, dtype=np.float64)
    n_links = angles.shape[-1]
    cum = np.cumsum(angles, axis=-1)
    x = np.cos(cum).sum(axis=-1) / n_links
    y = np.sin(cum).sum(axis=-1) / n_links
    return np.stack([x, y], axis=-1)


def arm_evaluate(angles: np.ndarray, modifiers: EnvModifiers = NEUTRAL) -> tuple[np.ndarray, np.ndarray]:
    """Fitness and descriptor for a batch of angle rows ``(B, L)``."""
    angles = np.atleast_2d(np.asarray(angles, dtype=np.float64))
    if not np.all(np.isfinite(angles)) or np.any(np.abs(angles) > math.pi):
        raise ValueError("joint angles must lie in [-pi, pi]")
    angles = angles * modifiers.leg_coefficients(angles.shape[1])
    fitness = -np.std(angles, axis=1)
    descriptor = (forward_kinematics(angles) + 1.0) / 2.0
    return fitness, descriptor


@dataclass(frozen=True)
class ArmEnv:
    n_joints: int = 2
    n_agents: int = 2
    single_agent: bool = False

    name = "arm"
    deterministic = True

    def __post_init__(self) -> None:
        if not 1 <= self.n_agents <= self.n_joints:
            raise ValueError(f"need 1 <= n_agents <= n_joints, got {self.n_agents} agents for {self.n_joints} joints")

    @property
    def joint_split(self) -> tuple[int, ...]:
        n = 1 if self.single_agent else self.n_agents
        return tuple(len(part) for part in np.array_split(np.arange(self.n_joints), n))

    @property
    def spec(self) -> EnvSpec:
        split = self.joint_split
        return EnvSpec(len(split), (0,) * len(split), split, 2, 0, 1, 1.0)

    def as_single_agent(self) -> "ArmEnv":
        return ArmEnv(self.n_joints, self.n_agents, single_agent=True)

    def describe(self) -> dict:
        return {"name": self.name, "n_joints": self.n_joints, "n_agents": self.n_agents, "single_agent": self.single_agent}

    def agent_specs(self) -> tuple[VectorSpec, ...]:
        return tuple(VectorSpec(n, ANGLE_BOUNDS) for n in self.joint_split)

    def evaluate(
        self,
        teams: Sequence[TeamGenome],
        modifiers: EnvModifiers = NEUTRAL,
        record: bool = False,
    ) -> list[EvalResult]:
        specs = self.agent_specs()
        for team in teams:
            if team.specs != specs:
                raise ValueError("team shape does not match the environment's agent specs")
        if not teams:
            return []
        angles = np.array([np.concatenate([a.theta for a in team]) for team in teams])
        fitness, descriptor = arm_evaluate(angles, modifiers)
        return [EvalResult(float(f), d.copy(), 1) for f, d in zip(fitness, descriptor)]
