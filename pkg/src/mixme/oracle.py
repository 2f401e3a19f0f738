"""Independent reference computations used to check the archive and to
bound what the gait task can reach.

The arm check enumerates a grid of joint angles, inserts every genome into
an :class:`Archive`, and compares the result with a brute-force per-cell
argmax that shares no code with the archive or the arm environment.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from mixme import rng as rngmod
from mixme.archive import Archive, GridConfig
from mixme.envs.arm import ArmEnv
from mixme.envs.gait import GaitEnv
from mixme.policy import TeamGenome


@dataclass(frozen=True)
class OracleReport:
    n_genomes: int
    n_cells: int
    mismatches: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _reference_arm(angles: Sequence[float]) -> tuple[float, tuple[float, float]]:
    """Fitness and descriptor from complex rotations, written from scratch."""
    n = len(angles)
    mean = math.fsum(angles) / n
    fitness = -math.sqrt(math.fsum((a - mean) ** 2 for a in angles) / n)
    tip = 0j
    heading = 0.0
    for a in angles:
        heading += a
        tip += cmath.rect(1.0 / n, heading)
    return fitness, ((tip.real + 1.0) / 2.0, (tip.imag + 1.0) / 2.0)


def _reference_cell(desc: tuple[float, ...], cells: int) -> tuple[int, ...]:
    return tuple(min(cells - 1, max(0, int(math.floor(d * cells)))) for d in desc)


def arm_enumeration_check(
    n_values: int = 11,
    cells_per_dim: int = 5,
    n_joints: int = 2,
    order: Optional[np.random.Generator] = None,
) -> OracleReport:
    """Insert every enumerated arm genome and compare with brute force.

    Angles take ``n_values`` evenly spaced values over ``[-pi, pi]``. With
    ``order`` the genomes are inserted in a random permutation; ties are then
    accepted if the stored genome is any of the tied maximisers.
    """
    env = ArmEnv(n_joints=n_joints, n_agents=n_joints)
    specs = env.agent_specs()
    values = np.linspace(-math.pi, math.pi, n_values)
    combos = [tuple(float(v) for v in c) for c in itertools.product(values, repeat=n_joints)]
    genomes = [TeamGenome.from_arrays(specs, [np.array([a]) for a in c]) for c in combos]

    best: dict[tuple[int, ...], tuple[float, list[int]]] = {}
    for i, combo in enumerate(combos):
        fit, desc = _reference_arm(combo)
        cell = _reference_cell(desc, cells_per_dim)
        if cell not in best or fit > best[cell][0]:
            best[cell] = (fit, [i])
        elif fit == best[cell][0]:
            best[cell][1].append(i)

    archive = Archive(GridConfig((cells_per_dim,) * 2))
    results = env.evaluate(genomes)
    sequence = range(len(genomes)) if order is None else order.permutation(len(genomes))
    for i in sequence:
        archive.try_insert(genomes[i], results[i].fitness, results[i].descriptor)

    mismatches = []
    for cell in sorted(set(best) | set(archive.cells)):
        if cell not in archive.cells:
            mismatches.append(f"cell {cell}: missing from archive")
            continue
        if cell not in best:
            mismatches.append(f"cell {cell}: occupied but brute force finds nothing there")
            continue
        elite = archive.cells[cell]
        fit, winners = best[cell]
        if elite.fitness != fit:
            mismatches.append(f"cell {cell}: fitness {elite.fitness!r} != {fit!r}")
        allowed = winners if order is not None else winners[:1]
        if not any(elite.genome == genomes[w] for w in allowed):
            mismatches.append(f"cell {cell}: stored genome is not the brute-force argmax")
    return OracleReport(len(genomes), len(best), mismatches)


def random_search_cells(
    env: GaitEnv,
    n_evals: int,
    seed: int = 0,
    cells_per_dim: int = 10,
    chunk: int = 2048,
) -> set[tuple[int, ...]]:
    """Grid cells hit by ``n_evals`` random gait policies.

    Half the draws follow the initialisation distribution, the other half
    are uniform over the full parameter bounds (saturated bang-bang
    controllers), which reaches behaviours random init alone never shows.
    """
    from mixme.policy import init_random

    specs = env.agent_specs()
    grid = GridConfig((cells_per_dim,) * env.spec.descriptor_dim)
    lo, hi = specs[0].bounds
    n_agents, width = len(specs), specs[0].param_count
    found: set[tuple[int, ...]] = set()
    done = 0
    block = 0
    while done < n_evals:
        n = min(chunk, n_evals - done)
        gen = rngmod.stream(seed, rngmod.RANDOM_SEARCH, block)
        n_init = n // 2
        init = [[init_random(s, g).theta for s in specs] for g in gen.spawn(n_init)]
        params = np.empty((n, n_agents, width))
        if n_init:
            params[:n_init] = np.array(init)
        params[n_init:] = gen.uniform(lo, hi, (n - n_init, n_agents, width))
        _, desc = env.evaluate_params(params)
        scaled = (desc - np.array(grid.lower_bounds)) / (np.array(grid.upper_bounds) - np.array(grid.lower_bounds))
        idx = np.clip(np.floor(scaled * cells_per_dim).astype(int), 0, cells_per_dim - 1)
        found.update(map(tuple, idx.tolist()))
        done += n
        block += 1
    return found
