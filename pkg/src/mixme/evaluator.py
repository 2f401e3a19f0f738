"""Episode evaluation of team genomes, single and batched, and the
median-of-repeats adaptation score used for generalisation tests."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from mixme.archive import Archive
from mixme.envs.base import NEUTRAL, EnvModifiers, Environment, EvalResult
from mixme.policy import TeamGenome

__all__ = ["EvalResult", "adapted_best_fitness", "elite_median_fitness", "evaluate_batch", "rollout"]


def rollout(env: Environment, team: TeamGenome, modifiers: EnvModifiers = NEUTRAL, record: bool = False) -> EvalResult:
    return env.evaluate([team], modifiers, record)[0]


def evaluate_batch(
    env: Environment,
    teams: Sequence[TeamGenome],
    modifiers: EnvModifiers = NEUTRAL,
    record: bool = False,
) -> list[EvalResult]:
    """Evaluate teams; result ``i`` is identical to ``rollout(env, teams[i])``."""
    if not teams:
        raise ValueError("nothing to evaluate")
    return env.evaluate(list(teams), modifiers, record)


def elite_median_fitness(
    archive: Archive, env: Environment, modifiers: EnvModifiers = NEUTRAL, n_evals: int = 100
) -> np.ndarray:
    """Median fitness over ``n_evals`` episodes for every elite, in cell order.

    Deterministic environments give identical episodes, so they are run
    once and the median of ``n_evals`` copies is that single value.
    """
    if n_evals < 1:
        raise ValueError("n_evals must be >= 1")
    if len(archive) == 0:
        raise ValueError("archive is empty")
    teams = [e.genome for e in archive.elites()]
    repeats = 1 if env.deterministic else n_evals
    runs = np.array([[r.fitness for r in evaluate_batch(env, teams, modifiers)] for _ in range(repeats)])
    if repeats == 1:
        return runs[0]
    return np.median(runs, axis=0)


def adapted_best_fitness(
    archive: Archive, env: Environment, modifiers: EnvModifiers = NEUTRAL, n_evals: int = 100
) -> float:
    """Maximum over elites of their median fitness under ``modifiers``."""
    return float(elite_median_fitness(archive, env, modifiers, n_evals).max())
