"""The MAP-Elites main loop, hyperparameter grid search and generalisation
sweeps."""

from __future__ import annotations

import enum
import itertools
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

from mixme import rng as rngmod
from mixme.archive import Archive, InsertOutcome
from mixme.config import ConfigError, RunConfig, SearchSpace
from mixme.envs.base import EnvModifiers, Environment
from mixme.evaluator import adapted_best_fitness, evaluate_batch
from mixme.policy import init_team
from mixme.variation import VariationConfig, emit_batch

INITIAL = "initial"


@dataclass(frozen=True)
class MetricsRow:
    iteration: int
    env_interactions: int
    max_fitness: Optional[float]
    coverage: float
    qd_score: float


@dataclass(frozen=True)
class OperatorStats:
    """Insertion outcomes of the offspring one operator produced in one iteration."""

    iteration: int
    operator: str
    offspring: int
    inserted_empty: int
    replaced: int
    rejected: int


@dataclass
class RunArtifacts:
    config: RunConfig
    archive: Archive
    metrics: list[MetricsRow] = field(default_factory=list)
    operator_stats: list[OperatorStats] = field(default_factory=list)
    env_timesteps: int = 0


def _insert_all(archive: Archive, genomes, results, iteration: int, tags: Sequence[str]) -> tuple[list[OperatorStats], int]:
    counts: dict[str, Counter] = {}
    timesteps = 0
    for genome, result, tag in zip(genomes, results, tags):
        outcome = archive.try_insert(genome, result.fitness, result.descriptor)
        counts.setdefault(tag, Counter())[outcome] += 1
        timesteps += result.steps_executed
    stats = [
        OperatorStats(
            iteration,
            tag,
            sum(c.values()),
            c[InsertOutcome.INSERTED_EMPTY],
            c[InsertOutcome.REPLACED],
            c[InsertOutcome.REJECTED],
        )
        for tag, c in counts.items()
    ]
    return stats, timesteps


def _row(archive: Archive, iteration: int, interactions: int) -> MetricsRow:
    m = archive.compute_metrics()
    return MetricsRow(iteration, interactions, m.max_fitness, m.coverage, m.qd_score)


def run_map_elites(
    config: RunConfig,
    on_iteration: Optional[Callable[[int, Archive], None]] = None,
    env: Optional[Environment] = None,
) -> RunArtifacts:
    """Run MAP-Elites; every random draw derives from ``config.seed``.

    ``on_iteration(k, archive)`` is called after initialisation (``k=0``)
    and after each iteration's insertions. ``env`` overrides the environment
    built from the config.
    """
    env = config.build_env() if env is None else env
    specs = env.agent_specs()
    archive = Archive(config.grid_config(env.spec.descriptor_dim))
    artifacts = RunArtifacts(config, archive)

    n_init = config.initial_count
    init_streams = rngmod.stream(config.seed, rngmod.INIT).spawn(n_init)
    for start in range(0, n_init, config.batch_size):
        teams = [init_team(specs, s) for s in init_streams[start : start + config.batch_size]]
        stats, steps = _insert_all(archive, teams, evaluate_batch(env, teams), 0, [INITIAL] * len(teams))
        artifacts.env_timesteps += steps
        artifacts.operator_stats.extend(stats)
    artifacts.metrics.append(_row(archive, 0, n_init))
    if on_iteration is not None:
        on_iteration(0, archive)

    for k in range(1, config.n_iterations + 1):
        batch = emit_batch(
            archive,
            config.batch_size,
            config.variant,
            config.variation,
            rngmod.stream(config.seed, rngmod.VARIATION, k),
        )
        teams = [o.genome for o in batch]
        results = evaluate_batch(env, teams)
        stats, steps = _insert_all(archive, teams, results, k, [o.operator.value for o in batch])
        artifacts.env_timesteps += steps
        artifacts.operator_stats.extend(stats)
        if k % config.metrics_every == 0:
            artifacts.metrics.append(_row(archive, k, n_init + k * config.batch_size))
        if on_iteration is not None:
            on_iteration(k, archive)
    return artifacts


# -- grid search -------------------------------------------------------------


@dataclass(frozen=True)
class GridSearchRow:
    sigma_iso: float
    sigma_line: float
    eta: float
    seed: int
    qd_score: float


@dataclass(frozen=True)
class GridSearchResult:
    best: VariationConfig
    best_mean_qd: float
    rows: list[GridSearchRow]
    means: list[tuple[float, float, float, float]]  # (sigma_iso, sigma_line, eta, mean qd)


def final_qd_score(config: RunConfig) -> float:
    return run_map_elites(config).metrics[-1].qd_score


def grid_search(
    base: RunConfig,
    space: Optional[SearchSpace] = None,
    score: Callable[[RunConfig], float] = final_qd_score,
) -> GridSearchResult:
    """Pick the variation hyperparameters with the highest mean final QD score.

    Seeds ``base.seed, base.seed + 1, ...`` are used for every combination.
    Combinations are visited in lexicographic order of
    ``(sigma_iso, sigma_line, eta)`` and only a strictly higher mean replaces
    the current best, so ties go to the lexicographically smallest.
    """
    space = base.grid_search if space is None else space
    rows: list[GridSearchRow] = []
    means = []
    best: Optional[tuple[float, VariationConfig]] = None
    for s_iso, s_line, eta in itertools.product(sorted(space.sigma_iso), sorted(space.sigma_line), sorted(space.eta)):
        variation = replace(base.variation, sigma_iso=s_iso, sigma_line=s_line, eta=eta)
        scores = []
        for offset in range(space.n_seeds):
            seed = base.seed + offset
            qd = float(score(replace(base, variation=variation, seed=seed)))
            rows.append(GridSearchRow(s_iso, s_line, eta, seed, qd))
            scores.append(qd)
        mean = sum(scores) / len(scores)
        means.append((s_iso, s_line, eta, mean))
        if best is None or mean > best[0]:
            best = (mean, variation)
    assert best is not None
    return GridSearchResult(best[1], best[0], rows, means)


# -- generalisation ----------------------------------------------------------


class Scenario(enum.Enum):
    GRAVITY = "gravity"
    DYSFUNCTION = "dysfunction"


def scenario_modifiers(scenario: Scenario, value: float, leg: int = 0) -> EnvModifiers:
    if scenario is Scenario.GRAVITY:
        return EnvModifiers(gravity_multiplier=value)
    return EnvModifiers(dysfunctional_leg=leg, dysfunction_coefficient=value)


def generalisation_sweep(
    config: RunConfig,
    archive: Archive,
    scenario: Scenario,
    values: Optional[Sequence[float]] = None,
    leg: Optional[int] = None,
    n_evals: Optional[int] = None,
    env: Optional[Environment] = None,
) -> list[tuple[float, float]]:
    """Adapted best fitness of ``archive`` at each modifier value."""
    if len(archive) == 0:
        raise ValueError("archive is empty")
    gen = config.generalisation
    if values is None:
        values = gen.gravity_values if scenario is Scenario.GRAVITY else gen.dysfunction_values
    leg = gen.dysfunction_leg if leg is None else leg
    n_evals = gen.n_evals if n_evals is None else n_evals
    env = config.build_env() if env is None else env
    if scenario is Scenario.DYSFUNCTION and not 0 <= leg < env.spec.n_feet:
        raise ConfigError(f"dysfunctional leg {leg} out of range for {env.spec.n_feet} legs")
    return [
        (float(v), adapted_best_fitness(archive, env, scenario_modifiers(scenario, v, leg), n_evals))
        for v in values
    ]


__all__ = [
    "INITIAL",
    "GridSearchResult",
    "GridSearchRow",
    "MetricsRow",
    "OperatorStats",
    "RunArtifacts",
    "Scenario",
    "final_qd_score",
    "generalisation_sweep",
    "grid_search",
    "run_map_elites",
    "scenario_modifiers",
]
