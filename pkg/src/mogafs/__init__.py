"""Multi-objective GA for wrapper feature selection with local improvement."""

from .baselines import SyntheticSpec, generate_synthetic, mi_rank, optimal_size_sweep, sfs_greedy
from .classifier import DecisionTree, predict, train, uar
from .data import Dataset, DatasetView, SplitSpec, load_csv, project, stratified_split
from .evolution import GAConfig, ReplacementStrategy, RunResult, run
from .frontier import (
    FrontMember,
    ParetoFront,
    export_front,
    load_front,
    representative_r1,
    representative_r1hat,
    summarize_replications,
)
from .objectives import ObjectiveConfig, ObjectiveVector, evaluate_chromosome
from .pareto import EvaluatedIndividual, SharingConfig, SharingSpace

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DatasetView",
    "DecisionTree",
    "EvaluatedIndividual",
    "FrontMember",
    "GAConfig",
    "ObjectiveConfig",
    "ObjectiveVector",
    "ParetoFront",
    "ReplacementStrategy",
    "RunResult",
    "SharingConfig",
    "SharingSpace",
    "SplitSpec",
    "SyntheticSpec",
    "evaluate_chromosome",
    "export_front",
    "generate_synthetic",
    "load_csv",
    "load_front",
    "mi_rank",
    "optimal_size_sweep",
    "predict",
    "project",
    "representative_r1",
    "representative_r1hat",
    "run",
    "sfs_greedy",
    "stratified_split",
    "summarize_replications",
    "train",
    "uar",
]
