"""Grid archive of elites and its summary metrics."""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from mixme.policy import TeamGenome

CellIndex = tuple[int, ...]


@dataclass(frozen=True)
class GridConfig:
    dims: tuple[int, ...]
    lower_bounds: Optional[tuple[float, ...]] = None
    upper_bounds: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("grid needs at least one axis")
        if min(dims) < 1:
            raise ValueError(f"cells per axis must be >= 1, got {dims}")
        lower = tuple(float(x) for x in (self.lower_bounds or (0.0,) * len(dims)))
        upper = tuple(float(x) for x in (self.upper_bounds or (1.0,) * len(dims)))
        if len(lower) != len(dims) or len(upper) != len(dims):
            raise ValueError("bounds must have one entry per axis")
        if any(not lo < hi for lo, hi in zip(lower, upper)):
            raise ValueError(f"every lower bound must be below its upper bound: {lower} vs {upper}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lower_bounds", lower)
        object.__setattr__(self, "upper_bounds", upper)

    @classmethod
    def uniform(cls, n_axes: int, cells_per_axis: int = 10, lower: float = 0.0, upper: float = 1.0) -> "GridConfig":
        return cls((cells_per_axis,) * n_axes, (lower,) * n_axes, (upper,) * n_axes)

    @property
    def n_axes(self) -> int:
        return len(self.dims)

    @property
    def total_cells(self) -> int:
        return math.prod(self.dims)


def descriptor_to_cell(b: Sequence[float], config: GridConfig) -> CellIndex:
    """Bin a descriptor; values outside the bounds land in the boundary cells."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (config.n_axes,):
        raise ValueError(f"descriptor of length {config.n_axes} expected, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("descriptor must be finite")
    lo = np.asarray(config.lower_bounds)
    hi = np.asarray(config.upper_bounds)
    dims = np.asarray(config.dims)
    idx = np.floor((b - lo) / (hi - lo) * dims).astype(np.int64)
    idx = np.clip(idx, 0, dims - 1)
    return tuple(int(i) for i in idx)


@dataclass(frozen=True, eq=False)
class Elite:
    genome: TeamGenome
    fitness: float
    descriptor: np.ndarray


class InsertOutcome(enum.Enum):
    INSERTED_EMPTY = "inserted_empty"
    REPLACED = "replaced"
    REJECTED = "rejected"

    @property
    def accepted(self) -> bool:
        return self is not InsertOutcome.REJECTED


@dataclass(frozen=True)
class ArchiveMetrics:
    max_fitness: Optional[float]
    coverage: float
    qd_score: float


@dataclass
class Archive:
    """One elite per cell of a regular grid over descriptor space.

    Single writer: callers apply batched insertions sequentially in batch
    order. Occupied cells are kept in sorted index order, which fixes the
    sampling order independently of insertion history.
    """

    config: GridConfig
    cells: dict[CellIndex, Elite] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._order: list[CellIndex] = sorted(self.cells)

    @property
    def occupied_count(self) -> int:
        return len(self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[tuple[CellIndex, Elite]]:
        for idx in self._order:
            yield idx, self.cells[idx]

    def try_insert(self, genome: TeamGenome, fitness: float, descriptor: Sequence[float]) -> InsertOutcome:
        """Insert if the cell is empty or ``fitness`` strictly beats the incumbent."""
        fitness = float(fitness)
        if not math.isfinite(fitness):
            raise ValueError(f"fitness must be finite, got {fitness}")
        idx = descriptor_to_cell(descriptor, self.config)
        incumbent = self.cells.get(idx)
        if incumbent is not None and not fitness > incumbent.fitness:
            return InsertOutcome.REJECTED
        desc = np.array(descriptor, dtype=np.float64)
        desc.flags.writeable = False
        self.cells[idx] = Elite(genome, fitness, desc)
        if incumbent is None:
            bisect.insort(self._order, idx)
            return InsertOutcome.INSERTED_EMPTY
        return InsertOutcome.REPLACED

    def sample_elites(self, k: int, rng: np.random.Generator) -> list[TeamGenome]:
        """Draw ``k`` genomes uniformly with replacement from occupied cells.

        Stored parameter arrays are read-only, so offspring built from the
        returned genomes can never alter the archive.
        """
        if k < 0:
            raise ValueError(f"k must be non-negative, got {k}")
        if k == 0:
            return []
        if not self.cells:
            raise ValueError("cannot sample from an empty archive")
        picks = rng.integers(0, len(self._order), size=k)
        return [self.cells[self._order[i]].genome for i in picks]

    def compute_metrics(self) -> ArchiveMetrics:
        if not self.cells:
            return ArchiveMetrics(None, 0.0, 0.0)
        fitnesses = [e.fitness for _, e in self]
        return ArchiveMetrics(
            max_fitness=max(fitnesses),
            coverage=len(fitnesses) / self.config.total_cells,
            qd_score=math.fsum(fitnesses),
        )

    def elites(self) -> list[Elite]:
        return [e for _, e in self]

    def fitness_grid(self) -> np.ndarray:
        """Dense fitness array of shape ``config.dims``; empty cells are NaN."""
        grid = np.full(self.config.dims, np.nan)
        for idx, e in self:
            grid[idx] = e.fitness
        return grid
