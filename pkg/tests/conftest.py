from __future__ import annotations

import numpy as np
import pytest

from mixme.policy import MlpSpec, TeamGenome, VectorSpec, init_team


def vector_team(*values: float, bounds=(-1000.0, 1000.0)) -> TeamGenome:
    """One single-gene agent per value."""
    specs = [VectorSpec(1, bounds) for _ in values]
    return TeamGenome.from_arrays(specs, [np.array([v]) for v in values])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def small_specs() -> tuple[MlpSpec, ...]:
    return tuple(MlpSpec(8, 1, (4, 4)) for _ in range(3))


@pytest.fixture
def small_team(small_specs, rng) -> TeamGenome:
    return init_team(small_specs, rng)


# -- acceptance reporting ------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []
ACCEPTANCE_TABLES: list[str] = []


class _Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)

    def table(self, text: str) -> None:
        ACCEPTANCE_TABLES.append(text)

    def __enter__(self) -> "_Criterion":
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        status = "PASS" if exc_type is None else "FAIL"
        detail = f" ({'; '.join(self.details)})" if self.details else ""
        ACCEPTANCE_LINES.append(f"criterion {self.number} {status}: {self.title}{detail}")
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
    for table in ACCEPTANCE_TABLES:
        terminalreporter.write_line("")
        terminalreporter.write_line(table)
