"""MAP-Elites with multi-agent team genomes, including the Mix-ME team
crossover, on deterministic desk-scale cooperative control tasks."""

from mixme.archive import Archive, ArchiveMetrics, Elite, GridConfig, InsertOutcome, descriptor_to_cell
from mixme.config import RunConfig, load_config
from mixme.envs import ArmEnv, EnvModifiers, EnvSpec, GaitEnv
from mixme.evaluator import adapted_best_fitness, evaluate_batch, rollout
from mixme.harness import RunArtifacts, Scenario, generalisation_sweep, grid_search, run_map_elites
from mixme.policy import AgentParams, MlpSpec, TeamGenome, VectorSpec
from mixme.variation import OperatorKind, Variant, VariationConfig, emit_batch, mixme_crossover

__version__ = "0.1.0"

__all__ = [
    "AgentParams",
    "Archive",
    "ArchiveMetrics",
    "ArmEnv",
    "Elite",
    "EnvModifiers",
    "EnvSpec",
    "GaitEnv",
    "GridConfig",
    "InsertOutcome",
    "MlpSpec",
    "OperatorKind",
    "RunArtifacts",
    "RunConfig",
    "Scenario",
    "TeamGenome",
    "Variant",
    "VariationConfig",
    "VectorSpec",
    "adapted_best_fitness",
    "descriptor_to_cell",
    "emit_batch",
    "evaluate_batch",
    "generalisation_sweep",
    "grid_search",
    "load_config",
    "mixme_crossover",
    "rollout",
    "run_map_elites",
]
