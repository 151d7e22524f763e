"""Continuous 3D pheromone volume shared by the ants of one colony.

Coordinates live in the unit cube: ``x`` is lateral placement, ``y`` is depth
(0 = input level, 1 = output level) and ``z`` is the recurrent-depth
coordinate that later becomes a time-skip.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Point3(NamedTuple):
    x: float
    y: float
    z: float

    def clamped(self) -> "Point3":
        return Point3(*(min(1.0, max(0.0, float(c))) for c in self))


class PheromonePoint(NamedTuple):
    pos: Point3
    strength: float


@dataclass(frozen=True)
class SpaceConfig:
    n_inputs: int
    n_outputs: int
    max_recurrent_depth: int = 3
    strength_floor: float = 0.05
    strength_max: float = 10.0
    initial_strength: float = 1.0
    deposit_amount: float = 1.0
    merge_radius: float = 0.01

    def __post_init__(self):
        if self.n_inputs < 1 or self.n_outputs < 1:
            raise ValueError("n_inputs and n_outputs must be >= 1")
        if self.max_recurrent_depth < 1:
            raise ValueError("max_recurrent_depth must be >= 1")
        if not (0 < self.strength_floor < self.initial_strength <= self.strength_max):
            raise ValueError(
                "need 0 < strength_floor < initial_strength <= strength_max, got "
                f"{self.strength_floor}, {self.initial_strength}, {self.strength_max}"
            )
        if self.deposit_amount <= 0 or self.merge_radius < 0:
            raise ValueError("deposit_amount must be > 0 and merge_radius >= 0")


def input_anchor(config: SpaceConfig, feature_idx: int) -> Point3:
    if not 0 <= feature_idx < config.n_inputs:
        raise ValueError(f"feature_idx {feature_idx} outside [0, {config.n_inputs})")
    return Point3((feature_idx + 0.5) / config.n_inputs, 0.0, 0.0)


def output_anchor(config: SpaceConfig, output_idx: int) -> Point3:
    if not 0 <= output_idx < config.n_outputs:
        raise ValueError(f"output_idx {output_idx} outside [0, {config.n_outputs})")
    return Point3((output_idx + 0.5) / config.n_outputs, 1.0, 0.0)


class PheromoneSpace:
    """Flat store of pheromone points with linear-scan queries.

    Points keep insertion order; removal by evaporation preserves the order of
    the survivors, so ``sense`` results are reproducible.
    """

    def __init__(self, config: SpaceConfig):
        self.config = config
        self._pos = np.empty((64, 3))
        self._strength = np.empty(64)
        self._n = 0

    @classmethod
    def seeded(cls, config: SpaceConfig) -> "PheromoneSpace":
        """A fresh space with ``initial_strength`` at every input and output anchor."""
        space = cls(config)
        for i in range(config.n_inputs):
            space.deposit(input_anchor(config, i), config.initial_strength)
        for j in range(config.n_outputs):
            space.deposit(output_anchor(config, j), config.initial_strength)
        return space

    def __len__(self) -> int:
        return self._n

    @property
    def positions(self) -> np.ndarray:
        return self._pos[: self._n]

    @property
    def strengths(self) -> np.ndarray:
        return self._strength[: self._n]

    def total_mass(self) -> float:
        return float(self.strengths.sum())

    def points(self) -> list[PheromonePoint]:
        return [
            PheromonePoint(Point3(*map(float, p)), float(s))
            for p, s in zip(self.positions, self.strengths)
        ]

    def _append(self, pos, strength: float) -> None:
        if self._n == len(self._strength):
            cap = 2 * len(self._strength)
            self._pos = np.resize(self._pos, (cap, 3))
            self._strength = np.resize(self._strength, cap)
        self._pos[self._n] = pos
        self._strength[self._n] = strength
        self._n += 1

    def deposit(self, pos, amount: float) -> None:
        """Add ``amount`` of pheromone at ``pos``.

        The nearest existing point within ``merge_radius`` absorbs the deposit
        (its position moves to the strength-weighted mean); otherwise a new
        point is created. A new point weaker than the floor is not stored.
        """
        p = np.asarray(pos, dtype=float)
        if p.shape != (3,) or not np.all(np.isfinite(p)) or not math.isfinite(amount):
            raise ValueError(f"non-finite deposit at {pos!r} amount {amount!r}")
        if amount <= 0:
            raise ValueError(f"deposit amount must be > 0, got {amount}")
        p = np.clip(p, 0.0, 1.0)
        cfg = self.config
        if self._n and cfg.merge_radius > 0:
            d = np.sqrt(((self.positions - p) ** 2).sum(axis=1))
            k = int(np.argmin(d))
            if d[k] <= cfg.merge_radius:
                s = self._strength[k]
                self._pos[k] = (s * self._pos[k] + amount * p) / (s + amount)
                self._strength[k] = min(s + amount, cfg.strength_max)
                return
        if amount >= cfg.strength_floor:
            self._append(p, min(amount, cfg.strength_max))

    def deposit_path(self, points, amount: float) -> None:
        for p in points:
            self.deposit(p, amount)

    def evaporate(self, evaporation_rate: float) -> None:
        """Multiply every strength by the retention factor and drop weak points."""
        if not 0.0 < evaporation_rate < 1.0:
            raise ValueError(f"evaporation rate {evaporation_rate} outside (0, 1)")
        s = self.strengths * evaporation_rate
        keep = s >= self.config.strength_floor
        n = int(keep.sum())
        self._pos[:n] = self.positions[keep]
        self._strength[:n] = s[keep]
        self._n = n

    def sense_arrays(self, center, radius: float) -> tuple[np.ndarray, np.ndarray]:
        """Positions and strengths of all points within ``radius`` of ``center``."""
        if radius <= 0:
            raise ValueError(f"sensing radius must be > 0, got {radius}")
        if not self._n:
            return np.empty((0, 3)), np.empty(0)
        c = np.asarray(center, dtype=float)
        hit = np.sqrt(((self.positions - c) ** 2).sum(axis=1)) <= radius
        return self.positions[hit], self.strengths[hit]

    def sense(self, center, radius: float) -> list[PheromonePoint]:
        pos, strength = self.sense_arrays(center, radius)
        return [PheromonePoint(Point3(*map(float, p)), float(s)) for p, s in zip(pos, strength)]

    def to_dict(self) -> list[dict]:
        return [
            {"x": float(p[0]), "y": float(p[1]), "z": float(p[2]), "strength": float(s)}
            for p, s in zip(self.positions, self.strengths)
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, config: SpaceConfig, items: list[dict]) -> "PheromoneSpace":
        space = cls(config)
        for item in items:
            space._append(
                np.array([item["x"], item["y"], item["z"]], dtype=float), float(item["strength"])
            )
        return space

    @classmethod
    def from_json(cls, config: SpaceConfig, text: str) -> "PheromoneSpace":
        return cls.from_dict(config, json.loads(text))
