"""Inertia-weight particle swarm over colony parameters.

Each colony's ``(num_ants, evaporation_rate, mortality_rate)`` is a particle in
the unit cube; the swarm only ever sees normalized positions. ``num_ants``
stays continuous here and is rounded on decode.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .colony import EVAPORATION_BOUNDS, MORTALITY_BOUNDS, NUM_ANTS_BOUNDS, ColonyParams

log = logging.getLogger(__name__)

BOUNDS = np.array([NUM_ANTS_BOUNDS, EVAPORATION_BOUNDS, MORTALITY_BOUNDS], dtype=float)


@dataclass(frozen=True)
class SwarmConfig:
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5
    v_max: float = 0.2

    def __post_init__(self):
        if not 0 < self.inertia < 1:
            raise ValueError(f"inertia must be in (0, 1), got {self.inertia}")
        if self.cognitive <= 0 or self.social <= 0:
            raise ValueError("cognitive and social coefficients must be > 0")
        if self.v_max <= 0:
            raise ValueError("v_max must be > 0")


@dataclass(frozen=True)
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray
    pbest_fitness: float = math.inf


def encode(params: ColonyParams) -> np.ndarray:
    v = np.array([params.num_ants, params.evaporation_rate, params.mortality_rate], dtype=float)
    lo, hi = BOUNDS[:, 0], BOUNDS[:, 1]
    if np.any(v < lo) or np.any(v > hi):
        raise ValueError(f"colony params {params} outside bounds")
    return (v - lo) / (hi - lo)


def decode(position) -> ColonyParams:
    p = np.clip(np.asarray(position, dtype=float), 0.0, 1.0)
    lo, hi = BOUNDS[:, 0], BOUNDS[:, 1]
    v = lo + p * (hi - lo)
    return ColonyParams(int(round(v[0])), float(v[1]), float(v[2]))


def update_particle(
    particle: Particle,
    gbest_position,
    cfg: SwarmConfig,
    rng: np.random.Generator,
) -> Particle:
    w = cfg.inertia
    x = particle.position
    g = np.asarray(gbest_position, dtype=float)
    r1 = rng.random(3)
    r2 = rng.random(3)
    v = (
        w * particle.velocity
        + cfg.cognitive * r1 * (particle.pbest_position - x)
        + cfg.social * r2 * (g - x)
    )
    v = np.clip(v, -cfg.v_max, cfg.v_max)
    return replace(particle, position=np.clip(x + v, 0.0, 1.0), velocity=v)


@dataclass
class Swarm:
    cfg: SwarmConfig
    particles: list[Particle]
    gbest_position: np.ndarray | None = None
    gbest_fitness: float = math.inf
    gbest_owner: int | None = None
    history: list[dict] = field(default_factory=list)

    @classmethod
    def from_positions(cls, positions, cfg: SwarmConfig, rng: np.random.Generator) -> "Swarm":
        """Particles start at ``positions`` with velocities drawn from U(-v_max, v_max)."""
        particles = []
        for p in positions:
            x = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
            v = rng.uniform(-cfg.v_max, cfg.v_max, size=3)
            particles.append(Particle(x, v, x.copy()))
        return cls(cfg, particles)

    def report(self, colony_id: int, position, fitness: float) -> None:
        if not 0 <= colony_id < len(self.particles):
            raise KeyError(f"unknown colony id {colony_id}")
        if not math.isfinite(fitness):
            log.info("ignoring non-finite fitness %r from colony %d", fitness, colony_id)
            return
        p = self.particles[colony_id]
        pos = np.asarray(position, dtype=float).copy()
        if fitness < p.pbest_fitness:
            self.particles[colony_id] = replace(p, pbest_position=pos, pbest_fitness=fitness)
        if fitness < self.gbest_fitness:
            self.gbest_position = pos.copy()
            self.gbest_fitness = fitness
            self.gbest_owner = colony_id

    def step(self, colony_id: int, rng: np.random.Generator) -> np.ndarray:
        """Move one particle toward its pbest and the gbest; return its new position."""
        p = self.particles[colony_id]
        g = self.gbest_position if self.gbest_position is not None else p.pbest_position
        self.particles[colony_id] = update_particle(p, g, self.cfg, rng)
        return self.particles[colony_id].position.copy()

    def positions(self) -> np.ndarray:
        return np.array([p.position for p in self.particles])


def minimize(fn, n_particles: int, iterations: int, cfg: SwarmConfig, rng: np.random.Generator):
    """Run the swarm synchronously on ``fn`` over the unit cube.

    Returns ``(best_position, best_fitness, best_fitness_per_iteration)``.
    """
    swarm = Swarm.from_positions(rng.random((n_particles, 3)), cfg, rng)
    curve = []
    for _ in range(iterations):
        for i, p in enumerate(swarm.particles):
            swarm.report(i, p.position, float(fn(p.position)))
        for i in range(n_particles):
            swarm.step(i, rng)
        curve.append(swarm.gbest_fitness)
    return swarm.gbest_position, swarm.gbest_fitness, curve
