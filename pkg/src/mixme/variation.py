"""Offspring generation: polynomial mutation, iso-line variation and
team crossover, plus the per-variant split of a batch across operators."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from mixme.archive import Archive
from mixme.policy import AgentParams, Bounds, TeamGenome


class OperatorKind(enum.Enum):
    POLYNOMIAL = "polynomial"
    ISO_LINE = "iso_line"
    CROSSOVER = "crossover"


class Variant(enum.Enum):
    SINGLE_AGENT = "sa"
    NAIVE_MA = "naive"
    MIX_ME = "mixme"

    @property
    def operators(self) -> tuple[OperatorKind, ...]:
        if self is Variant.MIX_ME:
            return (OperatorKind.POLYNOMIAL, OperatorKind.ISO_LINE, OperatorKind.CROSSOVER)
        return (OperatorKind.POLYNOMIAL, OperatorKind.ISO_LINE)


@dataclass(frozen=True)
class VariationConfig:
    eta: float = 16.0
    p_mut: Optional[float] = None  # None: 1 / genome length
    sigma_iso: float = 0.01
    sigma_line: float = 0.1

    def __post_init__(self) -> None:
        if self.eta < 0 or self.sigma_iso < 0 or self.sigma_line < 0:
            raise ValueError("eta, sigma_iso and sigma_line must be non-negative")
        if self.p_mut is not None and not 0.0 < self.p_mut <= 1.0:
            raise ValueError(f"p_mut must lie in (0, 1], got {self.p_mut}")


def _check_bounds(x: np.ndarray, bounds: Bounds, name: str = "x") -> None:
    lo, hi = bounds
    if not lo < hi:
        raise ValueError(f"invalid bounds {bounds}")
    if x.size and (not np.all(np.isfinite(x)) or x.min() < lo or x.max() > hi):
        raise ValueError(f"{name} lies outside bounds {bounds}")


def apply_polynomial_mutation(
    x: np.ndarray, u: np.ndarray, mask: np.ndarray, eta: float, bounds: Bounds
) -> np.ndarray:
    """Deterministic core of :func:`polynomial_mutation` for given draws."""
    x = np.asarray(x, dtype=np.float64)
    lo, hi = bounds
    u = np.asarray(u, dtype=np.float64)
    power = 1.0 / (eta + 1.0)
    with np.errstate(invalid="ignore"):
        delta = np.where(u <= 0.5, (2.0 * u) ** power - 1.0, 1.0 - (2.0 * (1.0 - u)) ** power)
    moved = np.where(u <= 0.5, x + delta * (x - lo), x + delta * (hi - x))
    out = np.where(mask, np.clip(moved, lo, hi), x)
    return out


def polynomial_mutation(
    x: np.ndarray, cfg: VariationConfig, bounds: Bounds, rng: np.random.Generator
) -> np.ndarray:
    """Bounded polynomial mutation; each gene mutates with probability ``p_mut``."""
    x = np.asarray(x, dtype=np.float64)
    _check_bounds(x, bounds)
    p = cfg.p_mut if cfg.p_mut is not None else 1.0 / max(x.size, 1)
    mask = rng.random(x.size) < p
    u = rng.random(x.size)
    return apply_polynomial_mutation(x, u, mask, cfg.eta, bounds)


def apply_isoline(
    x1: np.ndarray, x2: np.ndarray, eps: np.ndarray, xi: float, cfg: VariationConfig, bounds: Bounds
) -> np.ndarray:
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    out = x1 + cfg.sigma_iso * np.asarray(eps) + cfg.sigma_line * xi * (x2 - x1)
    return np.clip(out, *bounds)


def isoline_variation(
    x1: np.ndarray, x2: np.ndarray, cfg: VariationConfig, bounds: Bounds, rng: np.random.Generator
) -> np.ndarray:
    """Iso-line variation: isotropic Gaussian noise plus a move along ``x2 - x1``.

    The line coefficient is a single scalar per call.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.shape != x2.shape:
        raise ValueError(f"parents differ in shape: {x1.shape} vs {x2.shape}")
    _check_bounds(x1, bounds, "x1")
    _check_bounds(x2, bounds, "x2")
    eps = rng.standard_normal(x1.size)
    xi = rng.standard_normal()
    return apply_isoline(x1, x2, eps, xi, cfg, bounds)


def naive_team_variation(
    parent: TeamGenome,
    op: OperatorKind,
    cfg: VariationConfig,
    rng: np.random.Generator,
    partner: Optional[TeamGenome] = None,
) -> TeamGenome:
    """Mutate every agent of a single parent team.

    Agent ``i`` uses its own sub-stream ``rng.spawn(len(parent))[i]``. Iso-line
    variation takes the direction from agent ``i`` of ``partner``.
    """
    if op is OperatorKind.CROSSOVER:
        raise ValueError("team crossover is not a per-agent mutation")
    if op is OperatorKind.ISO_LINE:
        if partner is None:
            raise ValueError("iso-line variation needs a partner team")
        if partner.specs != parent.specs:
            raise ValueError("partner team shape differs from parent")
    streams = rng.spawn(len(parent))
    agents = []
    for i, (agent, sub) in enumerate(zip(parent, streams)):
        bounds = agent.spec.bounds
        if op is OperatorKind.POLYNOMIAL:
            theta = polynomial_mutation(agent.theta, cfg, bounds, sub)
        else:
            theta = isoline_variation(agent.theta, partner[i].theta, cfg, bounds, sub)
        agents.append(AgentParams(agent.spec, theta))
    return TeamGenome(tuple(agents))


def mixme_crossover(parents: Sequence[TeamGenome]) -> TeamGenome:
    """Agent ``i`` of the offspring is agent ``i`` of ``parents[i]``, unchanged."""
    if not parents:
        raise ValueError("need at least one parent")
    n = len(parents[0])
    if len(parents) != n:
        raise ValueError(f"team crossover needs {n} parents for {n}-agent teams, got {len(parents)}")
    specs = parents[0].specs
    if any(p.specs != specs for p in parents):
        raise ValueError("parents have heterogeneous team shapes")
    return TeamGenome(tuple(parents[i][i] for i in range(n)))


def operator_counts(batch_size: int, variant: Variant) -> dict[OperatorKind, int]:
    """Even split of a batch; the remainder goes to operators in listed order."""
    if batch_size < 0:
        raise ValueError("batch_size must be non-negative")
    ops = variant.operators
    base, extra = divmod(batch_size, len(ops))
    return {op: base + (1 if i < extra else 0) for i, op in enumerate(ops)}


@dataclass(frozen=True, eq=False)
class Offspring:
    genome: TeamGenome
    operator: OperatorKind


def emit_batch(
    archive: Archive,
    batch_size: int,
    variant: Variant,
    cfg: VariationConfig,
    rng: np.random.Generator,
) -> list[Offspring]:
    """Produce one batch of offspring from parents sampled out of ``archive``.

    Offspring ``i`` draws everything (parents and variation noise) from
    ``rng.spawn(batch_size)[i]``; offspring are grouped by operator in the
    order of ``variant.operators``.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if len(archive) == 0:
        raise ValueError("cannot emit offspring from an empty archive")
    counts = operator_counts(batch_size, variant)
    streams = iter(rng.spawn(batch_size))
    batch = []
    for op in variant.operators:
        for _ in range(counts[op]):
            sub = next(streams)
            if op is OperatorKind.POLYNOMIAL:
                (parent,) = archive.sample_elites(1, sub)
                child = naive_team_variation(parent, op, cfg, sub)
            elif op is OperatorKind.ISO_LINE:
                parent, partner = archive.sample_elites(2, sub)
                child = naive_team_variation(parent, op, cfg, sub, partner=partner)
            else:
                child = mixme_crossover(archive.sample_elites(_team_size(archive), sub))
            batch.append(Offspring(child, op))
    return batch


def _team_size(archive: Archive) -> int:
    _, elite = next(iter(archive))
    return len(elite.genome)
