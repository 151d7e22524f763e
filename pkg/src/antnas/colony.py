"""One ant colony: pheromone space, ant roster, elite population and parameters.

A generation of ant paths is clustered into nodes; consecutive clusters along
each path become feed-forward edges and every hidden node gets a recurrent
self-loop whose time-skip comes from its ``z`` coordinate.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .ants import AntPath, AntTraits, apply_mortality, forage, spawn_ant
from .space import PheromoneSpace, Point3, SpaceConfig

log = logging.getLogger(__name__)

NUM_ANTS_BOUNDS = (10, 200)
EVAPORATION_BOUNDS = (0.15, 0.95)
MORTALITY_BOUNDS = (0.01, 0.1)

MAX_GENOME_ATTEMPTS = 5


class DegenerateGenome(ValueError):
    """Clustering left no input-to-output route for some output."""


class ColonyError(RuntimeError):
    pass


@dataclass(frozen=True)
class ColonyParams:
    num_ants: int
    evaporation_rate: float
    mortality_rate: float

    def __post_init__(self):
        checks = (
            ("num_ants", self.num_ants, NUM_ANTS_BOUNDS),
            ("evaporation_rate", self.evaporation_rate, EVAPORATION_BOUNDS),
            ("mortality_rate", self.mortality_rate, MORTALITY_BOUNDS),
        )
        for name, v, (lo, hi) in checks:
            if not lo <= v <= hi:
                raise ValueError(f"{name}={v} outside [{lo}, {hi}]")
        if int(self.num_ants) != self.num_ants:
            raise ValueError(f"num_ants must be an integer, got {self.num_ants}")

    @classmethod
    def clamped(cls, num_ants: float, evaporation_rate: float, mortality_rate: float):
        return cls(
            int(min(max(round(num_ants), NUM_ANTS_BOUNDS[0]), NUM_ANTS_BOUNDS[1])),
            min(max(evaporation_rate, EVAPORATION_BOUNDS[0]), EVAPORATION_BOUNDS[1]),
            min(max(mortality_rate, MORTALITY_BOUNDS[0]), MORTALITY_BOUNDS[1]),
        )

    def as_dict(self) -> dict:
        return {
            "num_ants": self.num_ants,
            "evaporation_rate": self.evaporation_rate,
            "mortality_rate": self.mortality_rate,
        }


# -- genome ----------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    id: int
    centroid: Point3
    layer_rank: int
    kind: str  # "input" | "hidden" | "output"
    index: int = -1  # feature index for inputs, output index for outputs


@dataclass(frozen=True)
class Genome:
    nodes: tuple[Node, ...]
    ff_edges: tuple[tuple[int, int], ...]
    rec_edges: tuple[tuple[int, int, int], ...]
    n_inputs: int
    n_outputs: int
    max_recurrent_depth: int
    provenance_paths: tuple[AntPath, ...] = ()

    @property
    def hidden_nodes(self) -> list[Node]:
        return [n for n in self.nodes if n.kind == "hidden"]

    def to_dict(self, with_paths: bool = False) -> dict:
        d = {
            "n_inputs": self.n_inputs,
            "n_outputs": self.n_outputs,
            "max_recurrent_depth": self.max_recurrent_depth,
            "nodes": [
                {
                    "id": n.id,
                    "kind": n.kind,
                    "index": n.index,
                    "layer_rank": n.layer_rank,
                    "centroid": list(n.centroid),
                }
                for n in self.nodes
            ],
            "ff_edges": [list(e) for e in self.ff_edges],
            "rec_edges": [list(e) for e in self.rec_edges],
        }
        if with_paths:
            d["provenance_paths"] = [
                {"feature_idx": p.feature_idx, "points": [list(q) for q in p.points]}
                for p in self.provenance_paths
            ]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Genome":
        nodes = tuple(
            Node(n["id"], Point3(*n["centroid"]), n["layer_rank"], n["kind"], n["index"])
            for n in d["nodes"]
        )
        paths = tuple(
            AntPath(p["feature_idx"], tuple(Point3(*q) for q in p["points"]))
            for p in d.get("provenance_paths", [])
        )
        return cls(
            nodes=nodes,
            ff_edges=tuple(tuple(e) for e in d["ff_edges"]),
            rec_edges=tuple(tuple(e) for e in d["rec_edges"]),
            n_inputs=d["n_inputs"],
            n_outputs=d["n_outputs"],
            max_recurrent_depth=d["max_recurrent_depth"],
            provenance_paths=paths,
        )


def _anchor_key(p) -> tuple[float, float] | None:
    if p[1] == 0.0 or p[1] == 1.0:
        return (p[1], p[0])
    return None


def cluster_points(points, cluster_radius: float) -> tuple[list[int], list[Point3]]:
    """Fixed-radius agglomeration in input order.

    A point joins the first cluster (by creation order) whose running-mean
    centroid lies within ``cluster_radius``; anchors only ever merge with the
    same anchor.
    """
    if not cluster_radius > 0:
        raise ValueError(f"cluster_radius must be > 0, got {cluster_radius}")
    sums: list[np.ndarray] = []
    counts: list[int] = []
    anchors: dict[tuple[float, float], int] = {}
    free_ids: list[int] = []  # non-anchor cluster ids in creation order
    free_cent = np.empty((0, 3))
    assignment = []
    for p in points:
        q = np.asarray(p, dtype=float)
        key = _anchor_key(q)
        cid = None
        if key is not None:
            cid = anchors.get(key)
        elif free_ids:
            d = np.sqrt(((free_cent - q) ** 2).sum(axis=1))
            hits = np.flatnonzero(d <= cluster_radius)
            if len(hits):
                slot = int(hits[0])
                cid = free_ids[slot]
        if cid is None:
            cid = len(sums)
            sums.append(q.copy())
            counts.append(1)
            if key is not None:
                anchors[key] = cid
            else:
                free_ids.append(cid)
                free_cent = np.vstack([free_cent, q])
        else:
            sums[cid] += q
            counts[cid] += 1
            if key is None:
                free_cent[slot] = sums[cid] / counts[cid]
        assignment.append(cid)
    centroids = [Point3(*map(float, s / c)) for s, c in zip(sums, counts)]
    return assignment, centroids


def time_skip(z: float, max_recurrent_depth: int) -> int:
    return int(min(max(1 + math.floor(z * max_recurrent_depth), 1), max_recurrent_depth))


def build_genome(
    paths: list[AntPath],
    cluster_radius: float,
    max_recurrent_depth: int,
    n_inputs: int,
    n_outputs: int,
) -> Genome:
    if not paths:
        raise ValueError("build_genome needs at least one path")
    flat = [p for path in paths for p in path.points]
    assignment, centroids = cluster_points(flat, cluster_radius)

    kinds, index = {}, {}
    for cid, c in enumerate(centroids):
        if c.y == 0.0:
            kinds[cid], index[cid] = "input", min(int(c.x * n_inputs), n_inputs - 1)
        elif c.y == 1.0:
            kinds[cid], index[cid] = "output", min(int(c.x * n_outputs), n_outputs - 1)
        else:
            kinds[cid], index[cid] = "hidden", -1

    edges: set[tuple[int, int]] = set()
    pos = 0
    for path in paths:
        seq = assignment[pos : pos + len(path.points)]
        pos += len(path.points)
        for a, b in zip(seq, seq[1:]):
            if a != b and centroids[b].y > centroids[a].y:
                edges.add((a, b))

    succ: dict[int, list[int]] = {}
    pred: dict[int, list[int]] = {}
    for a, b in sorted(edges):
        succ.setdefault(a, []).append(b)
        pred.setdefault(b, []).append(a)

    def reach(starts, adj):
        seen, stack = set(starts), list(starts)
        while stack:
            for m in adj.get(stack.pop(), ()):
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return seen

    inputs = [c for c, k in kinds.items() if k == "input"]
    outputs = [c for c, k in kinds.items() if k == "output"]
    live = reach(inputs, succ) & reach(outputs, pred)
    reached_outputs = {index[c] for c in outputs if c in live}
    if len(reached_outputs) < n_outputs:
        raise DegenerateGenome(
            f"outputs {sorted(set(range(n_outputs)) - reached_outputs)} have no input route"
        )

    keep = sorted(live)
    new_id = {c: i for i, c in enumerate(keep)}
    ff = sorted((new_id[a], new_id[b]) for a, b in edges if a in live and b in live)

    # longest-path depth; edges always increase centroid y so sorting by y is topological
    rank = {c: 0 for c in keep}
    for c in sorted(keep, key=lambda c: centroids[c].y):
        for m in succ.get(c, ()):
            if m in live:
                rank[m] = max(rank[m], rank[c] + 1)

    nodes = tuple(
        Node(new_id[c], centroids[c], rank[c], kinds[c], index[c]) for c in keep
    )
    rec = tuple(
        (n.id, n.id, time_skip(n.centroid.z, max_recurrent_depth))
        for n in nodes
        if n.kind == "hidden"
    )
    return Genome(
        nodes=nodes,
        ff_edges=tuple(ff),
        rec_edges=rec,
        n_inputs=n_inputs,
        n_outputs=n_outputs,
        max_recurrent_depth=max_recurrent_depth,
        provenance_paths=tuple(paths),
    )


# -- population ------------------------------------------------------------


@dataclass
class Member:
    genome: Genome
    fitness: float
    weights: np.ndarray | None = None


@dataclass
class Population:
    capacity: int
    members: list[Member] = field(default_factory=list)

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("population capacity must be >= 1")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def best(self) -> Member | None:
        return self.members[0] if self.members else None

    @property
    def best_fitness(self) -> float:
        return self.members[0].fitness if self.members else math.inf


def try_insert(
    population: Population,
    genome: Genome,
    fitness: float,
    trained_weights,
    space: PheromoneSpace | None,
    deposit_amount: float,
) -> bool:
    """Replace-worst insertion; a successful insert rewards the genome's paths."""
    if not math.isfinite(fitness):
        log.warning("rejected candidate with non-finite fitness %r", fitness)
        return False
    members = population.members
    if len(members) >= population.capacity:
        if fitness >= members[-1].fitness:
            return False
        members.pop()
    keys = [m.fitness for m in members]
    members.insert(bisect.bisect_right(keys, fitness), Member(genome, fitness, trained_weights))
    if space is not None:
        for path in genome.provenance_paths:
            space.deposit_path(path.points, deposit_amount)
    return True


# -- colony ----------------------------------------------------------------


@dataclass(frozen=True)
class ColonyConfig:
    space: SpaceConfig
    cluster_radius: float = 0.1
    population_capacity: int = 20


class Colony:
    def __init__(
        self,
        colony_id: int,
        config: ColonyConfig,
        params: ColonyParams,
        rng: np.random.Generator,
    ):
        self.colony_id = colony_id
        self.config = config
        self.params = params
        self.rng = rng
        self.space = PheromoneSpace.seeded(config.space)
        self.ants: list[AntTraits] = []
        self._births: list[int] = []  # birth serial per roster slot
        self._next_birth = 0
        self._spawn(params.num_ants)
        self.population = Population(config.population_capacity)
        self.generation = 0

    def _spawn(self, n: int) -> None:
        for _ in range(n):
            self.ants.append(spawn_ant(self.rng))
            self._births.append(self._next_birth)
            self._next_birth += 1

    def generate_candidate(self) -> Genome:
        sc = self.config.space
        for attempt in range(MAX_GENOME_ATTEMPTS):
            paths = [forage(ant, self.space, self.rng) for ant in self.ants]
            try:
                return build_genome(
                    paths,
                    self.config.cluster_radius,
                    sc.max_recurrent_depth,
                    sc.n_inputs,
                    sc.n_outputs,
                )
            except DegenerateGenome as exc:
                log.debug("colony %d: degenerate genome (%s), attempt %d", self.colony_id, exc, attempt + 1)
        raise ColonyError(
            f"colony {self.colony_id}: {MAX_GENOME_ATTEMPTS} consecutive degenerate genomes"
        )

    def try_insert(self, genome: Genome, fitness: float, weights=None) -> bool:
        return try_insert(
            self.population, genome, fitness, weights, self.space, self.config.space.deposit_amount
        )

    def end_of_generation(self) -> None:
        self.space.evaporate(self.params.evaporation_rate)
        survivors = apply_mortality(self.ants, self.params.mortality_rate, self.rng)
        for i, (old, new) in enumerate(zip(self.ants, survivors)):
            if new is not old:
                self._births[i] = self._next_birth
                self._next_birth += 1
        self.ants = survivors
        self.generation += 1

    def apply_params(self, params: ColonyParams) -> None:
        if not isinstance(params, ColonyParams):
            raise TypeError("apply_params expects ColonyParams")
        n = params.num_ants
        if n > len(self.ants):
            self._spawn(n - len(self.ants))
        elif n < len(self.ants):
            newest = sorted(range(len(self.ants)), key=self._births.__getitem__)[n:]
            drop = set(newest)
            self.ants = [a for i, a in enumerate(self.ants) if i not in drop]
            self._births = [b for i, b in enumerate(self._births) if i not in drop]
        self.params = params
