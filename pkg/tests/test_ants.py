import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antnas.ants import (
    EXPLORATION_BOUNDS,
    MAX_PATH_POINTS,
    SENSING_RADIUS_BOUNDS,
    STEP_Y_BOUNDS,
    AntTraits,
    apply_mortality,
    forage,
    pick_entry,
    spawn_ant,
    step,
)
from antnas.space import PheromoneSpace, Point3, SpaceConfig, input_anchor, output_anchor


class StubRng:
    """Returns a fixed value from ``random`` and zeros from ``normal``."""

    def __init__(self, u):
        self.u = u

    def random(self, size=None):
        return self.u if size is None else np.full(size, self.u)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return np.zeros(size) if size is not None else 0.0


def space(n_inputs=4, n_outputs=1):
    return PheromoneSpace.seeded(SpaceConfig(n_inputs=n_inputs, n_outputs=n_outputs))


traits = st.builds(
    AntTraits,
    st.floats(*SENSING_RADIUS_BOUNDS),
    st.floats(*EXPLORATION_BOUNDS),
    st.floats(*STEP_Y_BOUNDS),
)


class TestSpawn:
    def test_zero_draws_hit_lower_bounds(self):
        a = spawn_ant(StubRng(0.0))
        assert (a.sensing_radius, a.exploration_factor, a.step_y) == (0.05, 0.0, 0.05)

    def test_high_draws_approach_upper_bounds(self):
        a = spawn_ant(StubRng(1.0 - 1e-12))
        assert a.sensing_radius == pytest.approx(0.5)
        assert a.exploration_factor == pytest.approx(1.0)
        assert a.step_y == pytest.approx(0.25)

    @given(st.integers(0, 2**32 - 1))
    def test_traits_within_bounds(self, seed):
        a = spawn_ant(np.random.default_rng(seed))
        assert SENSING_RADIUS_BOUNDS[0] <= a.sensing_radius <= SENSING_RADIUS_BOUNDS[1]
        assert 0.0 <= a.exploration_factor <= 1.0
        assert STEP_Y_BOUNDS[0] <= a.step_y <= STEP_Y_BOUNDS[1]

    def test_invalid_traits_rejected(self):
        with pytest.raises(ValueError):
            AntTraits(0.6, 0.5, 0.1)


class TestPickEntry:
    def test_weighted_frequency(self):
        s = space(n_inputs=2)
        s.deposit(input_anchor(s.config, 0), 2.0)  # strengths now (3, 1)
        rng = np.random.default_rng(0)
        n = 40_000
        hits = sum(pick_entry(s, rng, 2) == 0 for _ in range(n))
        assert hits / n == pytest.approx(0.75, abs=0.01)

    def test_uniform_when_no_pheromone(self):
        s = PheromoneSpace(SpaceConfig(n_inputs=4, n_outputs=1))
        rng = np.random.default_rng(1)
        counts = np.bincount([pick_entry(s, rng, 4) for _ in range(8000)], minlength=4)
        assert np.all(np.abs(counts / 8000 - 0.25) < 0.02)

    def test_single_input(self):
        assert pick_entry(space(n_inputs=1), np.random.default_rng(0), 1) == 0


class TestStep:
    def test_greedy_in_empty_region_goes_straight(self):
        s = PheromoneSpace(SpaceConfig(n_inputs=1, n_outputs=1))
        ant = AntTraits(0.1, 0.0, 0.1)
        nxt = step(ant, Point3(0.3, 0.2, 0.4), s, np.random.default_rng(0))
        assert nxt == pytest.approx((0.3, 0.3, 0.4))

    def test_greedy_moves_to_sensed_point(self):
        s = PheromoneSpace(SpaceConfig(n_inputs=1, n_outputs=1))
        s.deposit((0.35, 0.3, 0.45), 1.0)
        ant = AntTraits(0.1, 0.0, 0.1)
        nxt = step(ant, Point3(0.3, 0.2, 0.4), s, np.random.default_rng(0))
        assert nxt == pytest.approx((0.35, 0.3, 0.45))

    def test_centroid_is_strength_weighted(self):
        s = PheromoneSpace(SpaceConfig(n_inputs=1, n_outputs=1))
        s.deposit((0.2, 0.5, 0.5), 3.0)
        s.deposit((0.4, 0.5, 0.5), 1.0)
        ant = AntTraits(0.2, 0.0, 0.1)
        nxt = step(ant, Point3(0.3, 0.4, 0.5), s, np.random.default_rng(0))
        assert nxt.x == pytest.approx(0.25)
        assert nxt.y == pytest.approx(0.5)

    def test_y_advances_by_step_exactly(self):
        ant = AntTraits(0.3, 1.0, 0.17)
        nxt = step(ant, Point3(0.5, 0.1, 0.5), space(), np.random.default_rng(3))
        assert nxt.y == pytest.approx(0.27)

    def test_final_step_snaps_to_output_anchor(self):
        s = space(n_outputs=2)
        ant = AntTraits(0.1, 0.0, 0.25)
        nxt = step(ant, Point3(0.9, 0.8, 0.3), s, np.random.default_rng(0))
        assert nxt == output_anchor(s.config, 1)

    def test_at_output_level_rejected(self):
        with pytest.raises(ValueError):
            step(AntTraits(0.1, 0.0, 0.1), Point3(0.5, 1.0, 0.0), space(), np.random.default_rng(0))


class TestForage:
    @pytest.mark.parametrize("step_y,n_points", [(0.25, 5), (0.2, 6), (0.05, 21)])
    def test_path_length(self, step_y, n_points):
        path = forage(AntTraits(0.2, 0.5, step_y), space(), np.random.default_rng(0))
        assert len(path.points) == n_points
        assert len(path.points) <= MAX_PATH_POINTS

    @settings(max_examples=60)
    @given(traits, st.integers(0, 10_000), st.integers(1, 5), st.integers(1, 3))
    def test_path_invariants(self, ant, seed, n_in, n_out):
        s = space(n_in, n_out)
        path = forage(ant, s, np.random.default_rng(seed))
        pts = np.array(path.points)
        assert path.points[0] == input_anchor(s.config, path.feature_idx)
        assert path.points[-1] in [output_anchor(s.config, j) for j in range(n_out)]
        assert np.all((pts >= 0.0) & (pts <= 1.0))
        assert np.all(np.diff(pts[:, 1]) > 0)
        assert len(pts) == math.ceil(1.0 / ant.step_y - 1e-9) + 1

    def test_same_seed_same_path(self):
        ant = AntTraits(0.2, 0.7, 0.1)
        a = forage(ant, space(), np.random.default_rng(5))
        b = forage(ant, space(), np.random.default_rng(5))
        assert a == b


class TestMortality:
    def test_zero_rate_keeps_everyone(self):
        ants = [spawn_ant(np.random.default_rng(i)) for i in range(20)]
        out = apply_mortality(ants, 0.0, np.random.default_rng(0))
        assert all(a is b for a, b in zip(ants, out))

    def test_unit_rate_replaces_everyone(self):
        ants = [spawn_ant(np.random.default_rng(i)) for i in range(20)]
        out = apply_mortality(ants, 1.0, np.random.default_rng(0))
        assert len(out) == 20
        assert not any(a is b for a, b in zip(ants, out))

    def test_replacement_count_is_binomial(self):
        rng = np.random.default_rng(0)
        ants = [spawn_ant(rng) for _ in range(100)]
        deaths = [
            sum(a is not b for a, b in zip(ants, apply_mortality(ants, 0.1, rng)))
            for _ in range(500)
        ]
        # mean 10, sd of the mean sqrt(9) / sqrt(500) ~ 0.13
        assert np.mean(deaths) == pytest.approx(10.0, abs=0.6)

    @pytest.mark.parametrize("rate", [-0.01, 1.01])
    def test_rate_domain(self, rate):
        with pytest.raises(ValueError):
            apply_mortality([], rate, np.random.default_rng(0))
