"""Foraging agents that walk the pheromone volume from input level to output level."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .space import PheromoneSpace, Point3, input_anchor, output_anchor

SENSING_RADIUS_BOUNDS = (0.05, 0.5)
EXPLORATION_BOUNDS = (0.0, 1.0)
STEP_Y_BOUNDS = (0.05, 0.25)

# start + at most ceil(1/min step) moves; exceeding it means the step rule is broken
MAX_PATH_POINTS = math.ceil(1.0 / STEP_Y_BOUNDS[0]) + 2

# a y within this distance of 1 counts as having reached the output level
_Y_EPS = 1e-9


@dataclass(frozen=True)
class AntTraits:
    sensing_radius: float
    exploration_factor: float
    step_y: float

    def __post_init__(self):
        for name, (lo, hi) in (
            ("sensing_radius", SENSING_RADIUS_BOUNDS),
            ("exploration_factor", EXPLORATION_BOUNDS),
            ("step_y", STEP_Y_BOUNDS),
        ):
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ValueError(f"{name}={v} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class AntPath:
    feature_idx: int
    points: tuple[Point3, ...]


def spawn_ant(rng: np.random.Generator) -> AntTraits:
    u = rng.random(3)
    bounds = (SENSING_RADIUS_BOUNDS, EXPLORATION_BOUNDS, STEP_Y_BOUNDS)
    return AntTraits(*(lo + float(q) * (hi - lo) for q, (lo, hi) in zip(u, bounds)))


def anchor_strengths(space: PheromoneSpace, n_inputs: int) -> np.ndarray:
    """Pheromone sensed within ``merge_radius`` of each input anchor."""
    cfg = space.config
    radius = max(cfg.merge_radius, 1e-12)
    return np.array(
        [space.sense_arrays(input_anchor(cfg, i), radius)[1].sum() for i in range(n_inputs)]
    )


def pick_entry(space: PheromoneSpace, rng: np.random.Generator, n_inputs: int) -> int:
    """Roulette-wheel choice of the entry feature, weighted by anchor pheromone."""
    if n_inputs < 1:
        raise ValueError("n_inputs must be >= 1")
    u = float(rng.random())
    w = anchor_strengths(space, n_inputs)
    total = w.sum()
    if total <= 0:
        return min(int(u * n_inputs), n_inputs - 1)
    cdf = np.cumsum(w) / total
    return min(int(np.searchsorted(cdf, u, side="right")), n_inputs - 1)


def _nearest_output(space: PheromoneSpace, p) -> Point3:
    cfg = space.config
    anchors = [output_anchor(cfg, j) for j in range(cfg.n_outputs)]
    return min(anchors, key=lambda a: math.dist(a, p))


def step(ant: AntTraits, current: Point3, space: PheromoneSpace, rng: np.random.Generator) -> Point3:
    if current.y >= 1.0:
        raise ValueError("ant is already at the output level")
    y_next = current.y + ant.step_y
    ahead = np.array([current.x, y_next, current.z])
    pos, strength = space.sense_arrays(ahead, ant.sensing_radius)
    target = (strength @ pos) / strength.sum() if len(strength) else ahead
    jitter = rng.normal(0.0, ant.sensing_radius, size=2)
    explore = ahead.copy()
    explore[0] += jitter[0]
    explore[2] += jitter[1]
    e = ant.exploration_factor
    nxt = (1.0 - e) * target + e * explore
    nxt[1] = y_next
    nxt = np.clip(nxt, 0.0, 1.0)
    if y_next >= 1.0 - _Y_EPS:
        return _nearest_output(space, nxt)
    return Point3(float(nxt[0]), float(nxt[1]), float(nxt[2]))


def forage(ant: AntTraits, space: PheromoneSpace, rng: np.random.Generator) -> AntPath:
    cfg = space.config
    entry = pick_entry(space, rng, cfg.n_inputs)
    cur = input_anchor(cfg, entry)
    points = [cur]
    while cur.y < 1.0:
        cur = step(ant, cur, space, rng)
        points.append(cur)
        if len(points) > MAX_PATH_POINTS:
            raise RuntimeError(
                f"ant path exceeded {MAX_PATH_POINTS} points; step rule is not advancing"
            )
    return AntPath(entry, tuple(points))


def apply_mortality(
    ants: list[AntTraits], mortality_rate: float, rng: np.random.Generator
) -> list[AntTraits]:
    """Each ant dies with probability ``mortality_rate`` and is replaced by a newborn."""
    if not 0.0 <= mortality_rate <= 1.0:
        raise ValueError(f"mortality rate {mortality_rate} outside [0, 1]")
    dies = rng.random(len(ants)) < mortality_rate
    return [spawn_ant(rng) if d else a for a, d in zip(ants, dies)]
