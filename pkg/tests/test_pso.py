import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from antnas.colony import ColonyParams
from antnas.pso import Particle, Swarm, SwarmConfig, decode, encode, minimize, update_particle


def shifted_sphere(x):
    return float(np.sum((np.asarray(x) - np.array([0.3, 0.6, 0.2])) ** 2))


class TestCodec:
    @pytest.mark.parametrize(
        "params,pos",
        [((10, 0.15, 0.01), (0, 0, 0)), ((200, 0.95, 0.1), (1, 1, 1)), ((105, 0.55, 0.055), (0.5, 0.5, 0.5))],
    )
    def test_encode(self, params, pos):
        assert encode(ColonyParams(*params)) == pytest.approx(pos, abs=1e-12)

    @pytest.mark.parametrize(
        "pos,params",
        [((0, 0, 0), (10, 0.15, 0.01)), ((1, 1, 1), (200, 0.95, 0.1)), ((0.5, 0.5, 0.5), (105, 0.55, 0.055))],
    )
    def test_decode(self, pos, params):
        p = decode(pos)
        assert p.num_ants == params[0]
        assert (p.evaporation_rate, p.mortality_rate) == pytest.approx(params[1:], abs=1e-12)

    @given(st.integers(10, 200), st.floats(0.15, 0.95), st.floats(0.01, 0.1))
    def test_round_trip(self, n, e, m):
        p = decode(encode(ColonyParams(n, e, m)))
        assert p.num_ants == n
        assert p.evaporation_rate == pytest.approx(e, rel=1e-12)
        assert p.mortality_rate == pytest.approx(m, rel=1e-12)

    def test_decode_clips(self):
        assert decode((1.5, -0.2, 0.5)).num_ants == 200

    def test_encode_rejects_out_of_bounds(self):
        bad = object.__new__(ColonyParams)
        object.__setattr__(bad, "num_ants", 5)
        object.__setattr__(bad, "evaporation_rate", 0.5)
        object.__setattr__(bad, "mortality_rate", 0.05)
        with pytest.raises(ValueError):
            encode(bad)


def particle(x, v=(0, 0, 0), pbest=None, fit=math.inf):
    x = np.array(x, dtype=float)
    return Particle(x, np.array(v, dtype=float), np.array(pbest if pbest is not None else x, dtype=float), fit)


class TestUpdate:
    def test_fixed_point(self):
        p = particle((0.4, 0.4, 0.4))
        q = update_particle(p, p.position, SwarmConfig(), np.random.default_rng(0))
        assert np.array_equal(q.position, p.position)

    def test_pure_inertia(self):
        cfg = SimpleNamespace(inertia=1.0, cognitive=0.0, social=0.0, v_max=0.2)
        q = update_particle(particle((0.5, 0.5, 0.5), v=(0.1, 0, 0)), (0.9, 0.9, 0.9), cfg, np.random.default_rng(0))
        assert q.position == pytest.approx((0.6, 0.5, 0.5))

    def test_velocity_clamped(self):
        q = update_particle(particle((0.0, 0.0, 0.0)), (1.0, 1.0, 1.0), SwarmConfig(), np.random.default_rng(1))
        assert np.all(np.abs(q.velocity) <= 0.2)

    def test_deterministic(self):
        p = particle((0.2, 0.8, 0.5), v=(0.05, -0.1, 0.0), pbest=(0.3, 0.3, 0.3))
        a = update_particle(p, (0.9, 0.1, 0.4), SwarmConfig(), np.random.default_rng(5))
        b = update_particle(p, (0.9, 0.1, 0.4), SwarmConfig(), np.random.default_rng(5))
        assert np.array_equal(a.position, b.position)

    def test_fuzz_bounds(self):
        rng = np.random.default_rng(0)
        cfg = SwarmConfig()
        for _ in range(10_000):
            p = particle(rng.random(3), v=rng.uniform(-0.2, 0.2, 3), pbest=rng.random(3))
            q = update_particle(p, rng.random(3), cfg, rng)
            assert np.all((q.position >= 0) & (q.position <= 1))
            assert np.all(np.abs(q.velocity) <= cfg.v_max)

    @pytest.mark.parametrize("kw", [dict(inertia=1.0), dict(inertia=0.0), dict(cognitive=0.0), dict(v_max=0.0)])
    def test_config_invariants(self, kw):
        with pytest.raises(ValueError):
            SwarmConfig(**kw)


class TestReport:
    def swarm(self, n=2):
        return Swarm.from_positions(np.full((n, 3), 0.5), SwarmConfig(), np.random.default_rng(0))

    def test_first_report(self):
        s = self.swarm()
        s.report(0, (0.1, 0.2, 0.3), 0.4)
        assert s.gbest_fitness == 0.4 and s.particles[0].pbest_fitness == 0.4
        assert s.gbest_position.tolist() == [0.1, 0.2, 0.3]

    def test_worse_report_no_change(self):
        s = self.swarm()
        s.report(0, (0.1, 0.2, 0.3), 0.4)
        s.report(0, (0.9, 0.9, 0.9), 0.5)
        assert s.particles[0].pbest_position.tolist() == [0.1, 0.2, 0.3]
        assert s.gbest_fitness == 0.4

    def test_tie_keeps_incumbent(self):
        s = self.swarm()
        s.report(0, (0.1, 0.2, 0.3), 0.4)
        s.report(1, (0.9, 0.9, 0.9), 0.4)
        assert s.gbest_owner == 0

    def test_cross_colony_gbest(self):
        s = self.swarm()
        s.report(0, (0.1, 0.1, 0.1), 0.3)
        s.report(1, (0.2, 0.2, 0.2), 0.1)
        assert (s.gbest_fitness, s.gbest_owner) == (0.1, 1)

    def test_non_finite_ignored(self):
        s = self.swarm()
        s.report(0, (0.1, 0.1, 0.1), math.nan)
        assert s.gbest_fitness == math.inf

    def test_unknown_colony(self):
        with pytest.raises(KeyError):
            self.swarm().report(5, (0.1, 0.1, 0.1), 0.1)

    @given(st.lists(st.tuples(st.integers(0, 3), st.floats(0, 10) | st.just(math.inf)), max_size=50))
    def test_monotone_and_ordered(self, reports):
        s = self.swarm(4)
        last = math.inf
        for cid, f in reports:
            s.report(cid, (0.5, 0.5, 0.5), f)
            assert s.gbest_fitness <= last
            last = s.gbest_fitness
            assert all(s.gbest_fitness <= p.pbest_fitness for p in s.particles)


def test_initial_velocity_within_vmax():
    s = Swarm.from_positions(np.zeros((20, 3)), SwarmConfig(), np.random.default_rng(0))
    v = np.array([p.velocity for p in s.particles])
    assert np.all(np.abs(v) <= 0.2) and v.std() > 0


def test_shifted_sphere():
    solved = 0
    for seed in range(10):
        _, best, curve = minimize(shifted_sphere, 20, 200, SwarmConfig(), np.random.default_rng(seed))
        solved += best < 1e-3
        assert all(b <= a for a, b in zip(curve, curve[1:]))
    assert solved >= 9
