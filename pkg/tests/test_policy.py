from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixme.policy import AgentParams, MlpSpec, TeamGenome, VectorSpec, flatten, forward, init_random, init_team, unflatten

# tanh(tanh(tanh(1))) from a 40-digit mpmath evaluation
TANH3_OF_ONE = 0.5662699759614797


def _independent_count(input_dim, hidden, output_dim):
    total = 0
    prev = input_dim
    for width in [*hidden, output_dim]:
        total += prev * width  # weights
        total += width  # biases
        prev = width
    return total


class TestMlpSpec:
    def test_param_count_small(self):
        assert MlpSpec(2, 1, (3,)).param_count == (2 + 1) * 3 + (3 + 1) * 1

    @given(st.integers(1, 40), st.integers(1, 10), st.lists(st.integers(1, 70), max_size=4))
    def test_param_count_matches_layer_sum(self, i, o, hidden):
        assert MlpSpec(i, o, tuple(hidden)).param_count == _independent_count(i, hidden, o)

    # Robot shape table: (single-agent obs, action), per-agent obs and actions
    @pytest.mark.parametrize(
        "sa,ma_obs,ma_act",
        [
            ((28, 8), (18, 18, 18, 18), (2, 2, 2, 2)),
            ((18, 6), (9, 9, 8, 8, 9, 8), (1, 1, 1, 1, 1, 1)),
            ((11, 3), (8, 9, 8), (1, 1, 1)),
            ((376, 17), (248, 176), (9, 8)),
            ((22, 6), (17, 17), (3, 3)),
        ],
    )
    def test_robot_shapes(self, sa, ma_obs, ma_act):
        single = MlpSpec(*sa)
        assert single.param_count == _independent_count(sa[0], (64, 64), sa[1])
        team = [MlpSpec(o, a) for o, a in zip(ma_obs, ma_act)]
        assert sum(s.param_count for s in team) == sum(_independent_count(o, (64, 64), a) for o, a in zip(ma_obs, ma_act))
        assert sum(s.output_dim for s in team) == single.output_dim
        team_genome = init_team(team, np.random.default_rng(0))
        assert flatten(team_genome).size == sum(s.param_count for s in team)

    @pytest.mark.parametrize("kwargs", [{"input_dim": 0, "output_dim": 1}, {"input_dim": 1, "output_dim": 1, "bounds": (1, -1)}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            MlpSpec(**kwargs)


class TestAgentParams:
    def test_wrong_length(self):
        with pytest.raises(ValueError):
            AgentParams(VectorSpec(3, (-1, 1)), np.zeros(2))

    def test_out_of_bounds(self):
        with pytest.raises(ValueError):
            AgentParams(VectorSpec(2, (-1, 1)), np.array([0.0, 1.5]))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            AgentParams(VectorSpec(2, (-1, 1)), np.array([0.0, math.nan]))

    def test_read_only_copy(self):
        src = np.zeros(3)
        p = AgentParams(VectorSpec(3, (-1, 1)), src)
        src[0] = 0.5
        assert p.theta[0] == 0.0
        with pytest.raises(ValueError):
            p.theta[1] = 1.0


class TestInitRandom:
    def test_biases_zero_and_weight_scale(self, rng):
        spec = MlpSpec(4, 2, (9, 3))
        theta = init_random(spec, rng).theta
        off = 0
        for n_in, n_out in zip(spec.layer_dims[:-1], spec.layer_dims[1:]):
            w = theta[off : off + n_in * n_out]
            b = theta[off + n_in * n_out : off + (n_in + 1) * n_out]
            assert np.all(np.abs(w) <= 1 / math.sqrt(n_in))
            assert np.all(b == 0.0)
            off += (n_in + 1) * n_out
        assert off == theta.size

    def test_fan_in_four(self, rng):
        theta = init_random(MlpSpec(4, 1, ()), rng).theta
        assert np.all(np.abs(theta[:4]) <= 0.5)

    def test_deterministic(self):
        spec = MlpSpec(5, 2)
        a = init_random(spec, np.random.default_rng(3))
        b = init_random(spec, np.random.default_rng(3))
        assert a == b

    def test_vector_spec_uniform_over_bounds(self, rng):
        theta = init_random(VectorSpec(1000, (-2, 3)), rng).theta
        assert theta.min() >= -2 and theta.max() <= 3
        assert theta.min() < -1.5 and theta.max() > 2.5


class TestForward:
    def test_zero_theta_zero_action(self):
        spec = MlpSpec(8, 3)
        out = forward(AgentParams(spec, np.zeros(spec.param_count)), np.arange(8.0))
        np.testing.assert_array_equal(out, np.zeros(3))

    def test_unit_chain_matches_mpmath(self):
        spec = MlpSpec(1, 1, (1, 1))
        theta = np.array([1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
        with mpmath.workdps(40):
            oracle = float(mpmath.tanh(mpmath.tanh(mpmath.tanh(1))))
        assert oracle == TANH3_OF_ONE
        # float32 evaluation
        assert forward(AgentParams(spec, theta), np.array([1.0]))[0] == pytest.approx(TANH3_OF_ONE, abs=1e-6)

    def test_matches_float64_reference(self, rng):
        spec = MlpSpec(6, 3, (16, 16))
        for _ in range(20):
            params = init_random(spec, rng)
            obs = rng.normal(size=6) * 3
            h = obs
            off = 0
            for n_in, n_out in zip(spec.layer_dims[:-1], spec.layer_dims[1:]):
                w = params.theta[off : off + n_in * n_out].reshape(n_in, n_out)
                b = params.theta[off + n_in * n_out : off + (n_in + 1) * n_out]
                h = np.tanh(h @ w + b)
                off += (n_in + 1) * n_out
            np.testing.assert_allclose(forward(params, obs), h, atol=2e-6)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 1e6))
    def test_strictly_inside_unit_interval(self, seed, scale):
        r = np.random.default_rng(seed)
        spec = MlpSpec(5, 4, (8,))
        params = AgentParams(spec, r.uniform(-5, 5, spec.param_count))
        out = forward(params, r.normal(size=5) * scale)
        assert np.all(np.abs(out) < 1.0)

    def test_pure(self, rng):
        params = init_random(MlpSpec(5, 2), rng)
        obs = rng.normal(size=5)
        first = forward(params, obs)
        for _ in range(5):
            assert forward(params, obs).tobytes() == first.tobytes()

    def test_dimension_mismatch(self, rng):
        params = init_random(MlpSpec(5, 2), rng)
        with pytest.raises(ValueError):
            forward(params, np.zeros(4))

    def test_non_finite_obs(self, rng):
        params = init_random(MlpSpec(2, 2), rng)
        with pytest.raises(ValueError):
            forward(params, np.array([0.0, math.inf]))


class TestFlatten:
    def test_round_trip(self, small_team):
        flat = flatten(small_team)
        back = unflatten(flat, small_team.specs)
        assert back == small_team
        assert flatten(back).tobytes() == flat.tobytes()

    def test_empty(self):
        assert flatten(TeamGenome(())).shape == (0,)
        assert len(unflatten(np.empty(0), ())) == 0

    def test_concatenation_order(self):
        specs = (VectorSpec(3, (-9, 9)), VectorSpec(5, (-9, 9)))
        team = TeamGenome.from_arrays(specs, [np.arange(3.0), np.arange(3.0, 8.0)])
        flat = flatten(team)
        assert flat.shape == (8,)
        np.testing.assert_array_equal(flat, np.arange(8.0))

    def test_length_mismatch(self, small_team):
        with pytest.raises(ValueError):
            unflatten(np.zeros(3), small_team.specs)

    def test_init_team_shapes(self, small_specs, rng):
        team = init_team(small_specs, rng)
        assert team.specs == small_specs
