from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import vector_team
from mixme.archive import Archive, GridConfig, InsertOutcome, descriptor_to_cell


class TestGridConfig:
    def test_defaults_are_unit_bounds(self):
        cfg = GridConfig((10, 10))
        assert cfg.lower_bounds == (0.0, 0.0)
        assert cfg.upper_bounds == (1.0, 1.0)
        assert cfg.total_cells == 100

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dims": ()},
            {"dims": (0, 3)},
            {"dims": (2,), "lower_bounds": (1.0,), "upper_bounds": (1.0,)},
            {"dims": (2, 2), "lower_bounds": (0.0,)},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            GridConfig(**kwargs)


class TestDescriptorToCell:
    def test_lower_boundary(self):
        assert descriptor_to_cell((0.0, 0.0), GridConfig((10, 10))) == (0, 0)

    def test_upper_boundary_clamps(self):
        assert descriptor_to_cell((1.0, 1.0), GridConfig((10, 10))) == (9, 9)

    def test_floor_arithmetic(self):
        assert descriptor_to_cell((0.5, 0.25), GridConfig((10, 10))) == (5, 2)

    def test_out_of_bounds_clamps(self):
        assert descriptor_to_cell((-3.0, 7.0), GridConfig((4, 4))) == (0, 3)

    def test_custom_bounds(self):
        cfg = GridConfig((4,), (-2.0,), (2.0,))
        assert descriptor_to_cell((0.0,), cfg) == (2,)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            descriptor_to_cell((0.1, 0.2, 0.3), GridConfig((10, 10)))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            descriptor_to_cell((math.nan, 0.2), GridConfig((10, 10)))

    @given(st.lists(st.floats(-2, 3, allow_nan=False), min_size=3, max_size=3), st.integers(1, 17))
    def test_always_in_range(self, b, n):
        idx = descriptor_to_cell(b, GridConfig((n, n, n)))
        assert all(0 <= i < n for i in idx)


class TestTryInsert:
    def test_empty_cell(self):
        archive = Archive(GridConfig((4, 4)))
        assert archive.try_insert(vector_team(1.0), 2.0, (0.1, 0.1)) is InsertOutcome.INSERTED_EMPTY
        assert archive.occupied_count == 1

    def test_strict_improvement_replaces(self):
        archive = Archive(GridConfig((4, 4)))
        archive.try_insert(vector_team(1.0), 3.0, (0.1, 0.1))
        new = vector_team(2.0)
        assert archive.try_insert(new, 5.0, (0.2, 0.2)) is InsertOutcome.REPLACED
        elite = archive.cells[(0, 0)]
        assert elite.genome == new and elite.fitness == 5.0
        np.testing.assert_array_equal(elite.descriptor, [0.2, 0.2])

    def test_tie_keeps_incumbent(self):
        archive = Archive(GridConfig((4, 4)))
        first = vector_team(1.0)
        archive.try_insert(first, 3.0, (0.1, 0.1))
        assert archive.try_insert(vector_team(2.0), 3.0, (0.1, 0.1)) is InsertOutcome.REJECTED
        assert archive.cells[(0, 0)].genome == first

    def test_worse_rejected(self):
        archive = Archive(GridConfig((4, 4)))
        archive.try_insert(vector_team(1.0), 3.0, (0.1, 0.1))
        assert not archive.try_insert(vector_team(2.0), -1.0, (0.1, 0.1)).accepted

    @pytest.mark.parametrize("fitness", [math.nan, math.inf, -math.inf])
    def test_non_finite_fitness(self, fitness):
        with pytest.raises(ValueError):
            Archive(GridConfig((4,))).try_insert(vector_team(1.0), fitness, (0.5,))

    def test_non_finite_descriptor(self):
        with pytest.raises(ValueError):
            Archive(GridConfig((4,))).try_insert(vector_team(1.0), 1.0, (math.inf,))

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.floats(-100, 100), st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=60))
    def test_monotone_and_sound(self, items):
        archive = Archive(GridConfig((3, 3)))
        best = -math.inf
        for k, (f, x, y) in enumerate(items):
            before = archive.fitness_grid()
            occupied = archive.occupied_count
            genome = vector_team(float(k))
            outcome = archive.try_insert(genome, f, (x, y))
            after = archive.fitness_grid()
            assert np.all(np.isnan(before) | (after >= before))
            assert archive.occupied_count >= occupied
            best = max(best, f)
            assert archive.compute_metrics().max_fitness == best
            if outcome.accepted:
                elite = archive.cells[descriptor_to_cell((x, y), archive.config)]
                assert elite.genome == genome and elite.fitness == f
        for idx, elite in archive:
            assert descriptor_to_cell(elite.descriptor, archive.config) == idx

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 4)), min_size=1, max_size=40), st.randoms())
    def test_order_independent_per_cell_max(self, items, rnd):
        """Any insertion order leaves each cell holding the maximum fitness."""
        cfg = GridConfig((5,))
        expected = {}
        for f, c in items:
            expected[(c,)] = max(expected.get((c,), -math.inf), f)
        shuffled = list(items)
        rnd.shuffle(shuffled)
        archive = Archive(cfg)
        for f, c in shuffled:
            archive.try_insert(vector_team(0.0), f, ((c + 0.5) / 5,))
        assert {idx: e.fitness for idx, e in archive} == expected


class TestSampleElites:
    def test_single_elite(self, rng):
        archive = Archive(GridConfig((4,)))
        q = vector_team(1.0)
        archive.try_insert(q, 1.0, (0.5,))
        assert archive.sample_elites(3, rng) == [q, q, q]

    def test_zero(self, rng):
        archive = Archive(GridConfig((4,)))
        archive.try_insert(vector_team(1.0), 1.0, (0.5,))
        assert archive.sample_elites(0, rng) == []

    def test_empty_archive(self, rng):
        with pytest.raises(ValueError):
            Archive(GridConfig((4,))).sample_elites(1, rng)

    def test_uniform_over_cells(self, rng):
        archive = Archive(GridConfig((4,)))
        a, b = vector_team(1.0), vector_team(2.0)
        archive.try_insert(a, 1.0, (0.1,))
        archive.try_insert(b, 100.0, (0.9,))
        n = 4000
        picks = archive.sample_elites(n, rng)
        n_a = sum(p is a for p in picks)
        assert n_a + sum(p is b for p in picks) == n
        assert abs(n_a - n / 2) <= 3 * math.sqrt(n / 4)
        # exact two-sided binomial tail under p = 1/2
        k = min(n_a, n - n_a)
        tail = 2 * sum(math.comb(n, i) for i in range(k + 1)) / 2**n
        assert tail > 1e-3

    def test_samples_cannot_alter_archive(self, rng):
        archive = Archive(GridConfig((4,)))
        archive.try_insert(vector_team(1.0), 1.0, (0.5,))
        (g,) = archive.sample_elites(1, rng)
        with pytest.raises(ValueError):
            g[0].theta[0] = 99.0
        assert archive.cells[(2,)].genome[0].theta[0] == 1.0


class TestMetrics:
    def test_empty(self):
        m = Archive(GridConfig((2, 4))).compute_metrics()
        assert (m.max_fitness, m.coverage, m.qd_score) == (None, 0.0, 0.0)

    def test_two_elites(self):
        archive = Archive(GridConfig((2, 4)))
        archive.try_insert(vector_team(1.0), 3.0, (0.1, 0.1))
        archive.try_insert(vector_team(2.0), -1.0, (0.9, 0.9))
        m = archive.compute_metrics()
        assert (m.max_fitness, m.coverage, m.qd_score) == (3.0, 0.25, 2.0)

    def test_single_cell(self):
        archive = Archive(GridConfig((1,)))
        archive.try_insert(vector_team(1.0), 7.0, (0.3,))
        m = archive.compute_metrics()
        assert (m.max_fitness, m.coverage, m.qd_score) == (7.0, 1.0, 7.0)

    def test_iteration_is_sorted(self):
        archive = Archive(GridConfig((5, 5)))
        for x, y in [(0.9, 0.1), (0.1, 0.9), (0.5, 0.5), (0.1, 0.1)]:
            archive.try_insert(vector_team(x), 1.0, (x, y))
        idx = [i for i, _ in archive]
        assert idx == sorted(idx)
