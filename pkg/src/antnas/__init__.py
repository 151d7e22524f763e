"""Multi-colony ant-based neural topology search for recurrent networks."""

from .ants import AntPath, AntTraits, apply_mortality, forage, pick_entry, spawn_ant, step
from .colony import (
    Colony,
    ColonyConfig,
    ColonyError,
    ColonyParams,
    DegenerateGenome,
    Genome,
    Population,
    build_genome,
    cluster_points,
    try_insert,
)
from .config import ConfigError, ExperimentConfig, load_config
from .nn import TrainConfig, compile_genome, forward, grad_check, mse, train_bptt
from .pso import Swarm, SwarmConfig, decode, encode, update_particle
from .space import PheromoneSpace, Point3, SpaceConfig, input_anchor, output_anchor

__version__ = "0.1.0"

__all__ = [
    "AntPath", "AntTraits", "apply_mortality", "forage", "pick_entry", "spawn_ant", "step",
    "Colony", "ColonyConfig", "ColonyError", "ColonyParams", "DegenerateGenome", "Genome",
    "Population", "build_genome", "cluster_points", "try_insert",
    "ConfigError", "ExperimentConfig", "load_config",
    "TrainConfig", "compile_genome", "forward", "grad_check", "mse", "train_bptt",
    "Swarm", "SwarmConfig", "decode", "encode", "update_particle",
    "PheromoneSpace", "Point3", "SpaceConfig", "input_anchor", "output_anchor",
]
