"""Factored legged-gait task: one agent per leg, shared reward.

Each leg is a damped pendulum driven by its agent's torque. A foot touches
the ground while its leg angle is within ``contact_angle`` of vertical, and
a leg pushing backwards while in contact propels the body. The reward is
``survive + forward * v - ctrl * sum(a**2)``; an episode ends early once no
foot has touched the ground for ``patience`` consecutive steps.

Agent ``f`` observes ``(theta_f, omega_f, contact_f, theta_left,
theta_right, omega_left, omega_right, v)`` where left/right are the cyclic
neighbours ``f-1`` and ``f+1``. The single-agent view is
``(theta_1..F, omega_1..F, contact_1..F, v)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from mixme._kernels import gait_observe, gait_rollout_batch, gait_step
from mixme.envs.base import NEUTRAL, EnvModifiers, EnvSpec, EvalResult, StepResult
from mixme.policy import MlpSpec, TeamGenome

LOCAL_OBS_DIM = 8
_CHUNK = 512


@dataclass(frozen=True)
class GaitConstants:
    dt: float = 0.05
    kappa: float = 2.0
    damping: float = 0.3
    gravity: float = 1.0
    contact_angle: float = math.pi / 4
    leg_radius: float = 1.0
    w_survive: float = 0.5
    w_forward: float = 1.0
    w_ctrl: float = 0.05
    patience: int = 20

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.patience < 1:
            raise ValueError("dt must be positive and patience >= 1")
        if self.w_ctrl < 0:
            raise ValueError("w_ctrl must be non-negative")

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.dt,
                self.kappa,
                self.damping,
                self.gravity,
                self.contact_angle,
                self.leg_radius,
                self.w_survive,
                self.w_forward,
                self.w_ctrl,
            ]
        )


@dataclass(frozen=True, eq=False)
class GaitState:
    theta: np.ndarray
    omega: np.ndarray
    contact: np.ndarray
    v: float = 0.0
    t: int = 0
    steps_without_contact: int = 0


@dataclass(frozen=True)
class GaitEnv:
    n_legs: int = 4
    episode_length: int = 300
    constants: GaitConstants = field(default_factory=GaitConstants)
    single_agent: bool = False
    hidden_dims: tuple[int, ...] = (64, 64)
    param_bounds: tuple[float, float] = (-5.0, 5.0)
    gamma: float = 1.0

    name = "gait"
    deterministic = True

    def __post_init__(self) -> None:
        if self.n_legs < 1:
            raise ValueError("need at least one leg")
        object.__setattr__(self, "hidden_dims", tuple(self.hidden_dims))

    @property
    def spec(self) -> EnvSpec:
        full = 3 * self.n_legs + 1
        if self.single_agent:
            return EnvSpec(1, (full,), (self.n_legs,), self.n_legs, full, self.episode_length, self.gamma)
        return EnvSpec(
            self.n_legs,
            (LOCAL_OBS_DIM,) * self.n_legs,
            (1,) * self.n_legs,
            self.n_legs,
            full,
            self.episode_length,
            self.gamma,
        )

    def as_single_agent(self) -> "GaitEnv":
        return GaitEnv(**{**self._fields(), "single_agent": True})

    def _fields(self) -> dict:
        return {
            "n_legs": self.n_legs,
            "episode_length": self.episode_length,
            "constants": self.constants,
            "single_agent": self.single_agent,
            "hidden_dims": self.hidden_dims,
            "param_bounds": self.param_bounds,
            "gamma": self.gamma,
        }

    def describe(self) -> dict:
        return {**self._fields(), "constants": asdict(self.constants), "name": self.name}

    def agent_specs(self) -> tuple[MlpSpec, ...]:
        spec = self.spec
        return tuple(
            MlpSpec(o, a, self.hidden_dims, self.param_bounds) for o, a in zip(spec.obs_dims, spec.action_dims)
        )

    # -- single-step interface -------------------------------------------

    def initial_state(self) -> GaitState:
        theta = np.zeros(self.n_legs)
        contact = np.abs(theta) <= self.constants.contact_angle
        return GaitState(theta, np.zeros(self.n_legs), contact)

    def observe(self, state: GaitState) -> list[np.ndarray]:
        spec = self.spec
        obs = []
        for agent in range(spec.n_agents):
            out = np.empty(spec.obs_dims[agent])
            gait_observe(state.theta, state.omega, state.contact, state.v, agent, self.single_agent, out)
            obs.append(out)
        return obs

    def step(self, state: GaitState, actions: Sequence[np.ndarray], modifiers: EnvModifiers = NEUTRAL) -> StepResult:
        spec = self.spec
        if len(actions) != spec.n_agents:
            raise ValueError(f"expected {spec.n_agents} actions, got {len(actions)}")
        joint = []
        for agent, a in enumerate(actions):
            a = np.asarray(a, dtype=np.float64).reshape(-1)
            if a.shape != (spec.action_dims[agent],):
                raise ValueError(f"agent {agent} action must have length {spec.action_dims[agent]}")
            if not np.all(np.abs(a) <= 1.0):
                raise ValueError(f"agent {agent} action outside [-1, 1]")
            joint.append(a)
        theta = state.theta.copy()
        omega = state.omega.copy()
        contact = np.empty(self.n_legs, dtype=bool)
        v, reward = gait_step(
            theta,
            omega,
            np.concatenate(joint),
            self.constants.as_array(),
            modifiers.gravity_multiplier,
            modifiers.leg_coefficients(self.n_legs),
            contact,
        )
        since = 0 if contact.any() else state.steps_without_contact + 1
        t = state.t + 1
        nxt = GaitState(theta, omega, contact, v, t, since)
        done = since >= self.constants.patience or t >= self.episode_length
        return StepResult(nxt, self.observe(nxt), float(reward), done, contact.copy())

    # -- batched rollouts ---------------------------------------------------

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
        results: list[EvalResult] = []
        for start in range(0, len(teams), _CHUNK):
            chunk = teams[start : start + _CHUNK]
            params = np.stack([np.stack([a.theta for a in team]) for team in chunk]).astype(np.float32)
            results.extend(self._run(params, modifiers, record))
        return results

    def evaluate_params(self, params: np.ndarray, modifiers: EnvModifiers = NEUTRAL) -> tuple[np.ndarray, np.ndarray]:
        """Fitness and descriptors for raw parameters of shape (teams, agents, params).

        Same numbers as :meth:`evaluate` on the equivalent genomes, without
        building genome objects; bounds are not checked.
        """
        spec = self.agent_specs()[0]
        params = np.asarray(params)
        if params.shape[1:] != (self.spec.n_agents, spec.param_count):
            raise ValueError(f"params must have shape (B, {self.spec.n_agents}, {spec.param_count})")
        results = self._run(params.astype(np.float32), modifiers, False)
        return np.array([r.fitness for r in results]), np.array([r.descriptor for r in results])

    def _run(self, params: np.ndarray, modifiers: EnvModifiers, record: bool) -> list[EvalResult]:
        dims = np.asarray(self.agent_specs()[0].layer_dims, dtype=np.int64)
        n = params.shape[0]
        fitness = np.empty(n)
        descriptors = np.empty((n, self.n_legs))
        steps = np.empty(n, dtype=np.int64)
        log_t = self.episode_length if record else 0
        contact_log = np.zeros((n if record else 0, log_t, self.n_legs), dtype=np.bool_)
        reward_log = np.zeros((n if record else 0, log_t))
        gait_rollout_batch(
            params, dims, self.single_agent, self.episode_length, self.gamma, self.constants.as_array(),
            self.constants.patience, modifiers.gravity_multiplier, modifiers.leg_coefficients(self.n_legs),
            record, fitness, descriptors, steps, contact_log, reward_log,
        )
        results = []
        for k in range(n):
            t = int(steps[k])
            results.append(
                EvalResult(
                    float(fitness[k]),
                    descriptors[k].copy(),
                    t,
                    contacts=contact_log[k, :t].copy() if record else None,
                    rewards=reward_log[k, :t].copy() if record else None,
                )
            )
        return results
