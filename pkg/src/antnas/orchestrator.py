"""Environment, colony generator and worker roles wired over FIFO channels.

Roles share nothing mutable; they exchange immutable messages. The same role
objects run either under a single-threaded round-robin scheduler
(``mode="deterministic"``, bit-reproducible) or one thread per role
(``mode="concurrent"``).

Protocol per colony: the generator keeps at most ``workers_per_colony``
candidates in flight; workers pull requests at their own pace. Every
``exchange_interval`` generations the generator sends a ``PsoReport`` and
pauses generation until the environment answers with the colony's new swarm
position, which it applies before the next generation.
"""

from __future__ import annotations

import logging
import math
import threading
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .colony import Colony, ColonyConfig, ColonyParams, Genome
from .config import ExperimentConfig
from .data import TimeSeries, load_csv, minmax_normalize, persistence_mse, split, synth_generate
from .nn import TrainConfig, compile_genome, forward, mse, train_bptt
from .pso import Swarm, decode, encode
from .space import SpaceConfig

log = logging.getLogger(__name__)


class ProtocolError(RuntimeError):
    pass


# -- messages --------------------------------------------------------------


@dataclass(frozen=True)
class EvalRequest:
    colony_id: int
    candidate_seq: int
    genome: Genome


@dataclass(frozen=True)
class EvalResult:
    colony_id: int
    candidate_seq: int
    fitness: float
    trained_weights: np.ndarray | None


@dataclass(frozen=True)
class PsoReport:
    colony_id: int
    exchange_idx: int
    position: tuple[float, float, float]
    window_best_fitness: float


@dataclass(frozen=True)
class PsoBroadcast:
    gbest_position: tuple[float, float, float] | None
    gbest_fitness: float
    # set only on the copy sent back to the reporting colony
    exchange_idx: int | None = None
    position: tuple[float, float, float] | None = None


@dataclass(frozen=True)
class ColonyDone:
    colony_id: int


@dataclass(frozen=True)
class Shutdown:
    pass


class Channel:
    """Unbounded FIFO usable from one thread or many."""

    def __init__(self):
        self._items: deque = deque()
        self._cond = threading.Condition()

    def put(self, msg) -> None:
        with self._cond:
            self._items.append(msg)
            self._cond.notify_all()

    def get_nowait(self):
        with self._cond:
            return self._items.popleft() if self._items else None

    def wait(self, timeout: float) -> None:
        with self._cond:
            if not self._items:
                self._cond.wait(timeout)

    def __len__(self) -> int:
        return len(self._items)


# -- evaluation ------------------------------------------------------------


@dataclass(frozen=True)
class EvalData:
    """Normalized, supervised arrays shared read-only by all workers."""

    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray


def candidate_seed(seed: int, colony_id: int, candidate_seq: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, 1, colony_id, candidate_seq]))


def evaluate(genome: Genome, data: EvalData, train: TrainConfig, rng) -> tuple[float, np.ndarray | None]:
    try:
        graph = compile_genome(genome)
        res = train_bptt(graph, data.train_x, data.train_y, train, rng)
    except Exception:  # a broken candidate must not take the worker down
        log.exception("training failed")
        return math.inf, None
    return res.validation_mse, res.weights


# -- roles -----------------------------------------------------------------


class Role:
    done = False

    def step(self) -> bool:
        """Do one bounded unit of work; return whether anything happened."""
        raise NotImplementedError

    def inbox(self) -> Channel:
        raise NotImplementedError


class WorkerRole(Role):
    def __init__(self, name: str, requests: Channel, results: Channel, data: EvalData, train: TrainConfig, seed: int):
        self.name = name
        self.requests = requests
        self.results = results
        self.data = data
        self.train = train
        self.seed = seed
        self.evaluated = 0

    def inbox(self) -> Channel:
        return self.requests

    def step(self) -> bool:
        msg = self.requests.get_nowait()
        if msg is None:
            return False
        if isinstance(msg, Shutdown):
            self.done = True
            return True
        if not isinstance(msg, EvalRequest):
            raise ProtocolError(f"{self.name}: unexpected message {type(msg).__name__}")
        rng = candidate_seed(self.seed, msg.colony_id, msg.candidate_seq)
        fitness, weights = evaluate(msg.genome, self.data, self.train, rng)
        self.results.put(EvalResult(msg.colony_id, msg.candidate_seq, fitness, weights))
        self.evaluated += 1
        return True


@dataclass
class ColonyStats:
    requests: int = 0
    results: int = 0
    lost: int = 0
    inserted: int = 0
    exchanges: int = 0
    fitness_rows: list = field(default_factory=list)
    param_changes: list = field(default_factory=list)  # (generation, params)


class ColonyRole(Role):
    def __init__(
        self,
        colony: Colony,
        cfg: ExperimentConfig,
        results: Channel,
        requests: Channel,
        env: Channel,
    ):
        self.colony = colony
        self.cfg = cfg
        self.results = results
        self.requests = requests
        self.env = env
        self.position = encode(colony.params)
        self.in_flight: dict[int, Genome] = {}
        self.next_seq = 0
        self.awaiting: int | None = None
        self.window_best = math.inf
        self.gbest: PsoBroadcast | None = None
        self.stats = ColonyStats()

    @property
    def colony_id(self) -> int:
        return self.colony.colony_id

    def inbox(self) -> Channel:
        return self.results

    def _handle(self, msg) -> None:
        if isinstance(msg, EvalResult):
            genome = self.in_flight.pop(msg.candidate_seq, None)
            if genome is None or msg.colony_id != self.colony_id:
                raise ProtocolError(f"colony {self.colony_id}: result for unknown candidate {msg.candidate_seq}")
            self.stats.results += 1
            if self.colony.try_insert(genome, msg.fitness, msg.trained_weights):
                self.stats.inserted += 1
            if msg.fitness < self.window_best:
                self.window_best = msg.fitness
            self.stats.fitness_rows.append(
                (self.colony_id, msg.candidate_seq, msg.fitness, self.colony.population.best_fitness)
            )
        elif isinstance(msg, PsoBroadcast):
            self.gbest = msg
            if msg.position is not None:
                if msg.exchange_idx != self.awaiting:
                    raise ProtocolError(
                        f"colony {self.colony_id}: reply for exchange {msg.exchange_idx}, awaiting {self.awaiting}"
                    )
                self.position = np.asarray(msg.position, dtype=float)
                params = decode(self.position)
                self.colony.apply_params(params)
                self.stats.param_changes.append((self.colony.generation, params))
                self.awaiting = None
        else:
            raise ProtocolError(f"colony {self.colony_id}: unexpected message {type(msg).__name__}")

    def step(self) -> bool:
        progress = False
        while (msg := self.results.get_nowait()) is not None:
            self._handle(msg)
            progress = True
        if self.awaiting is not None:
            return progress
        cfg = self.cfg
        if self.colony.generation >= cfg.generations_per_colony:
            if not self.in_flight:
                for _ in range(cfg.workers_per_colony):
                    self.requests.put(Shutdown())
                self.env.put(ColonyDone(self.colony_id))
                self.done = True
                return True
            return progress
        if len(self.in_flight) >= cfg.workers_per_colony:
            return progress

        genome = self.colony.generate_candidate()
        seq = self.next_seq
        self.next_seq += 1
        self.in_flight[seq] = genome
        self.requests.put(EvalRequest(self.colony_id, seq, genome))
        self.stats.requests += 1
        self.colony.end_of_generation()
        gen = self.colony.generation
        if cfg.exchanges_enabled and gen % cfg.exchange_interval == 0:
            idx = self.stats.exchanges
            self.env.put(PsoReport(self.colony_id, idx, tuple(map(float, self.position)), self.window_best))
            self.stats.exchanges += 1
            self.awaiting = idx
            self.window_best = math.inf
        return True


class EnvironmentRole(Role):
    def __init__(self, swarm: Swarm, inbox: Channel, colonies: list[Channel], rng: np.random.Generator):
        self.swarm = swarm
        self._inbox = inbox
        self.colonies = colonies
        self.rng = rng
        self.finished: set[int] = set()
        self.trajectory: list[tuple] = []

    def inbox(self) -> Channel:
        return self._inbox

    def step(self) -> bool:
        msg = self._inbox.get_nowait()
        if msg is None:
            return False
        if isinstance(msg, PsoReport):
            cid = msg.colony_id
            if not 0 <= cid < len(self.colonies):
                raise ProtocolError(f"report from unknown colony {cid}")
            params = decode(msg.position)
            self.trajectory.append(
                (cid, msg.exchange_idx, params.num_ants, params.evaporation_rate,
                 params.mortality_rate, msg.window_best_fitness)
            )
            self.swarm.report(cid, msg.position, msg.window_best_fitness)
            new_pos = self.swarm.step(cid, self.rng)
            self.swarm.history.append(
                {"colony_id": cid, "exchange_idx": msg.exchange_idx,
                 "reported": list(msg.position), "position": new_pos.tolist(),
                 "fitness": msg.window_best_fitness}
            )
            g = self.swarm.gbest_position
            gpos = None if g is None else tuple(map(float, g))
            for j, ch in enumerate(self.colonies):
                if j == cid:
                    ch.put(PsoBroadcast(gpos, self.swarm.gbest_fitness, msg.exchange_idx, tuple(map(float, new_pos))))
                else:
                    ch.put(PsoBroadcast(gpos, self.swarm.gbest_fitness))
        elif isinstance(msg, ColonyDone):
            self.finished.add(msg.colony_id)
            if len(self.finished) == len(self.colonies):
                self.done = True
        else:
            raise ProtocolError(f"environment: unexpected message {type(msg).__name__}")
        return True


# -- schedulers ------------------------------------------------------------


def run_deterministic(roles: list[Role]) -> None:
    while True:
        progress = False
        for r in roles:
            if not r.done:
                progress |= r.step()
        if all(r.done for r in roles):
            return
        if not progress:
            stuck = [type(r).__name__ for r in roles if not r.done]
            raise ProtocolError(f"deadlock: no role can make progress ({stuck})")


def run_concurrent(roles: list[Role], poll: float = 0.05) -> None:
    failure: list[BaseException] = []
    abort = threading.Event()

    def loop(role: Role):
        try:
            while not role.done and not abort.is_set():
                if not role.step():
                    role.inbox().wait(poll)
        except BaseException as exc:
            failure.append(exc)
            abort.set()

    threads = [threading.Thread(target=loop, args=(r,), daemon=True) for r in roles]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if failure:
        raise failure[0]


# -- experiment ------------------------------------------------------------


@dataclass
class PreparedData:
    series: TimeSeries  # raw, full
    train: TimeSeries  # normalized
    test: TimeSeries  # normalized
    stats: object
    eval: EvalData
    test_raw: TimeSeries


def prepare_data(cfg: ExperimentConfig) -> PreparedData:
    d = cfg.data
    if d.source == "synth":
        series = synth_generate(d.synth_seed, d.length, d.n_inputs, d.noise_std)
    else:
        series = load_csv(d.path, list(d.targets))
    if not series.input_indices:
        raise ValueError("data needs at least one non-target input column")
    train_raw, test_raw = split(series, d.train_len, d.test_len)
    train, stats = minmax_normalize(train_raw)
    test, _ = minmax_normalize(test_raw, stats)
    tx, ty = train.supervised()
    sx, sy = test.supervised()
    return PreparedData(series, train, test, stats, EvalData(tx, ty, sx, sy), test_raw)


def validation_start(n_pairs: int, validation_fraction: float) -> int:
    return n_pairs - max(1, int(round(validation_fraction * n_pairs)))


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    colonies: list[dict]
    overall: dict
    fitness_rows: list[tuple]
    trajectory: list[tuple]
    swarm: dict
    baseline: dict
    normalization: dict
    wall_time_s: float
    best_models: dict[int, dict]
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "fitness_scale": "min-max normalized (training-window statistics)",
            "normalization": self.normalization,
            "baseline": self.baseline,
            "colonies": self.colonies,
            "overall": self.overall,
            "swarm": self.swarm,
            "evaluations": self.evaluations,
            "wall_time_s": self.wall_time_s,
        }


def build_roles(cfg: ExperimentConfig, data: EvalData, n_inputs: int, n_outputs: int):
    root = np.random.SeedSequence(cfg.seed)
    env_seq, *colony_seqs = root.spawn(cfg.n_colonies + 1)
    colony_cfg = ColonyConfig(
        SpaceConfig(n_inputs, n_outputs, **vars(cfg.space)),
        cluster_radius=cfg.cluster_radius,
        population_capacity=cfg.population_capacity,
    )
    env_inbox = Channel()
    colony_inboxes = [Channel() for _ in range(cfg.n_colonies)]
    colony_roles, workers = [], []
    for cid, ants in enumerate(cfg.initial_ants()):
        params = ColonyParams.clamped(ants, cfg.initial_evaporation, cfg.initial_mortality)
        colony = Colony(cid, colony_cfg, params, np.random.default_rng(colony_seqs[cid]))
        requests = Channel()
        colony_roles.append(ColonyRole(colony, cfg, colony_inboxes[cid], requests, env_inbox))
        for w in range(cfg.workers_per_colony):
            workers.append(WorkerRole(f"worker-{cid}.{w}", requests, colony_inboxes[cid], data, cfg.train, cfg.seed))
    env_rng = np.random.default_rng(env_seq)
    swarm = Swarm.from_positions([r.position for r in colony_roles], cfg.swarm, env_rng)
    env = EnvironmentRole(swarm, env_inbox, colony_inboxes, env_rng)
    return env, colony_roles, workers


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    from .config import ConfigError, validate

    problems = validate(cfg)
    if problems:
        raise ConfigError(problems)
    t0 = time.perf_counter()
    prep = prepare_data(cfg)
    n_in, n_out = len(prep.series.input_indices), len(prep.series.targets)
    env, colony_roles, workers = build_roles(cfg, prep.eval, n_in, n_out)

    # deterministic order: environment, then each colony followed by its workers
    roles: list[Role] = [env]
    per = cfg.workers_per_colony
    for i, c in enumerate(colony_roles):
        roles.append(c)
        roles.extend(workers[i * per : (i + 1) * per])
    if cfg.mode == "deterministic":
        run_deterministic(roles)
    else:
        run_concurrent(roles)
    wall = time.perf_counter() - t0

    n_pairs = len(prep.eval.train_x)
    vstart = validation_start(n_pairs, cfg.train.validation_fraction)
    baseline = {
        "persistence_validation_mse": persistence_mse(prep.train, vstart),
        "persistence_test_mse": persistence_mse(prep.test),
    }

    colonies, best_models, fitness_rows = [], {}, []
    overall = {"colony_id": None, "best_fitness": math.inf, "test_mse": None}
    for role in colony_roles:
        st = role.stats
        st.lost = st.requests - st.results
        pop = role.colony.population
        best = pop.best
        entry = {
            "colony_id": role.colony_id,
            "best_fitness": best.fitness if best else None,
            "test_mse": None,
            "requests": st.requests,
            "results": st.results,
            "lost_in_flight": st.lost,
            "inserted": st.inserted,
            "exchanges": st.exchanges,
            "param_changes_at_generation": [g for g, _ in st.param_changes],
            "initial_params": ColonyParams.clamped(
                cfg.initial_ants()[role.colony_id], cfg.initial_evaporation, cfg.initial_mortality
            ).as_dict(),
            "final_params": role.colony.params.as_dict(),
            "final_position": [float(v) for v in role.position],
            "best_genome": None,
        }
        if best is not None and best.weights is not None:
            graph = compile_genome(best.genome)
            test_mse = mse(forward(graph, best.weights, prep.eval.test_x), prep.eval.test_y)
            entry["test_mse"] = test_mse
            entry["best_genome"] = f"best_genome_{role.colony_id}.json"
            entry["best_nodes"] = len(best.genome.nodes)
            best_models[role.colony_id] = {
                "genome": best.genome.to_dict(),
                "weights": [float(v) for v in best.weights],
                "validation_mse": best.fitness,
                "test_mse": test_mse,
                "input_columns": prep.series.input_columns,
                "target_columns": prep.series.target_columns,
                "columns": prep.series.columns,
                "normalization": prep.stats.to_dict(),
            }
            if best.fitness < overall["best_fitness"]:
                overall = {"colony_id": role.colony_id, "best_fitness": best.fitness, "test_mse": test_mse}
        colonies.append(entry)
        fitness_rows.extend(st.fitness_rows)

    swarm = env.swarm
    report = ExperimentReport(
        config=cfg,
        colonies=colonies,
        overall=overall,
        fitness_rows=fitness_rows,
        trajectory=list(env.trajectory),
        swarm={
            "gbest_position": None if swarm.gbest_position is None else swarm.gbest_position.tolist(),
            "gbest_fitness": swarm.gbest_fitness if math.isfinite(swarm.gbest_fitness) else None,
            "gbest_owner": swarm.gbest_owner,
            "final_positions": swarm.positions().tolist(),
            "history": swarm.history,
        },
        baseline=baseline,
        normalization={"columns": prep.series.columns, **prep.stats.to_dict()},
        wall_time_s=wall,
        best_models=best_models,
        evaluations=sum(w.evaluated for w in workers),
    )
    return report


# -- persisted artifacts ---------------------------------------------------

FITNESS_HEADER = ["colony_id", "candidate_seq", "fitness", "best_fitness"]
TRAJECTORY_HEADER = ["colony_id", "exchange_idx", "num_ants", "evaporation", "mortality", "window_best_mse"]


def _write_rows(path, header, rows) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_outputs(report: ExperimentReport, out_dir) -> dict[str, str]:
    """Persist report.json, fitness.csv, trajectories.csv, best genomes and the raw test slice."""
    import json
    from pathlib import Path

    from .data import write_csv

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for cid, model in report.best_models.items():
        p = out / f"best_genome_{cid}.json"
        p.write_text(json.dumps(model, indent=1))
        paths[f"best_genome_{cid}"] = str(p)
    _write_rows(out / "fitness.csv", FITNESS_HEADER, report.fitness_rows)
    _write_rows(out / "trajectories.csv", TRAJECTORY_HEADER, report.trajectory)
    prep = prepare_data(report.config)
    write_csv(out / "test_slice.csv", prep.test_raw.columns, prep.test_raw.values)
    doc = report.to_dict()
    doc["files"] = {
        "fitness": "fitness.csv",
        "trajectories": "trajectories.csv",
        "test_slice": "test_slice.csv",
    }
    (out / "report.json").write_text(json.dumps(doc, indent=1, default=_json_default))
    paths.update(report=str(out / "report.json"), fitness=str(out / "fitness.csv"),
                 trajectories=str(out / "trajectories.csv"), test_slice=str(out / "test_slice.csv"))
    return paths


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, ColonyParams):
        return o.as_dict()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
