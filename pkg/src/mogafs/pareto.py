"""Rank, fitness, and crowding-based fitness sharing for a population.

The pipeline runs in four batch passes over an evaluated population:

1. rank = 1 + number of dominating individuals;
2. rank fitness = ``N - (individuals in better ranks) - (rank peers - 1)/2``,
   which is positive by construction and constant within a rank;
3. shared fitness: a single leader pass (descending rank fitness) forms
   clusters of radius ``sigma``; each individual's fitness is multiplied by
   ``(d / sigma) ** alpha`` for every cluster it belongs to, so crowded
   individuals are penalized.  An individual that founded its own cluster is
   not penalized by it;
4. normalized fitness redistributes each rank's common fitness across its
   members proportionally to shared fitness.

The clustering step is a deliberate reconstruction: the sharing function only
defines *when* two points share a niche, so we use leader clustering (best
individuals become centroids, later ones join every centroid within the
niche radius) as the documented concrete procedure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .objectives import ObjectiveVector

# Exact duplicates of a centroid would zero their fitness; floor the penalty
# so selection weights stay positive.
MIN_PENALTY_FACTOR = 1e-12


class SharingSpace(str, Enum):
    """Space in which niche distances are measured."""

    OBJECTIVE = "objective"
    DECISION = "decision"


@dataclass(frozen=True)
class SharingConfig:
    """Niche radius and taper of the sharing function.

    ``sharing(d) = 1 - (d / sigma) ** alpha``; two points share a niche when
    the value is positive, i.e. when ``d < sigma``.
    """

    sigma: float = 0.0025
    alpha: float = 1.0
    space: SharingSpace = SharingSpace.DECISION

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


@dataclass
class EvaluatedIndividual:
    """Chromosome plus everything the selection machinery derives from it."""

    chromosome: np.ndarray
    objectives: ObjectiveVector
    rank: int = 0
    fitness: float = 0.0
    shared_fitness: float = 0.0
    normalized_fitness: float = 0.0


@dataclass
class Cluster:
    """Leader cluster: the founding individual plus everyone in its niche."""

    centroid_index: int
    member_indices: list[int] = field(default_factory=list)


def dominates(a: ObjectiveVector, b: ObjectiveVector, n_objectives: int = 3) -> bool:
    """True iff ``a`` is >= ``b`` on every active objective and > on one."""
    va = a.values(n_objectives)
    vb = b.values(n_objectives)
    return all(x >= y for x, y in zip(va, vb)) and any(x > y for x, y in zip(va, vb))


def objective_matrix(pop: list[EvaluatedIndividual], n_objectives: int) -> np.ndarray:
    return np.array([ind.objectives.values(n_objectives) for ind in pop], dtype=np.float64)


def _domination_counts(values: np.ndarray) -> np.ndarray:
    """For each row, how many other rows dominate it (vectorized pairwise)."""
    ge = (values[:, None, :] >= values[None, :, :]).all(axis=2)
    gt = (values[:, None, :] > values[None, :, :]).any(axis=2)
    dominates_matrix = ge & gt  # [i, j] = i dominates j
    return dominates_matrix.sum(axis=0)


def assign_ranks(pop: list[EvaluatedIndividual], n_objectives: int = 3) -> list[EvaluatedIndividual]:
    """Set ``rank = 1 + (number of dominating individuals)`` on each member."""
    if not pop:
        return pop
    counts = _domination_counts(objective_matrix(pop, n_objectives))
    for ind, nd in zip(pop, counts):
        ind.rank = int(nd) + 1
    return pop


def rank_fitness(pop: list[EvaluatedIndividual], n: int | None = None) -> list[EvaluatedIndividual]:
    """Assign rank-based fitness.

    ``fitness = N - sum(n_k for k < rank) - (n_rank - 1) / 2`` where ``n_k``
    counts individuals at rank ``k``.  Equal ranks get equal fitness; values
    are strictly positive and decrease with rank.
    """
    if not pop:
        return pop
    if n is None:
        n = len(pop)
    ranks = np.array([ind.rank for ind in pop])
    rank_sizes = np.bincount(ranks, minlength=ranks.max() + 1)
    better = np.cumsum(rank_sizes)  # better[r] = individuals with rank <= r
    for ind in pop:
        r = ind.rank
        ind.fitness = float(n - better[r - 1] - (rank_sizes[r] - 1) / 2.0)
    return pop


def decision_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Root mean squared bit difference: ``sqrt(hamming / length)``."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if len(a) != len(b):
        raise ValueError(f"chromosome lengths differ: {len(a)} vs {len(b)}")
    return float(np.sqrt(np.mean(a != b)))


def objective_distance(a, b, lower: np.ndarray, upper: np.ndarray) -> float:
    """Euclidean distance between min-max normalized objective vectors.

    Coordinates with a degenerate observed range contribute zero.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    span = np.asarray(upper, dtype=np.float64) - np.asarray(lower, dtype=np.float64)
    diff = np.zeros_like(a)
    ok = span > 0
    diff[ok] = (a[ok] - b[ok]) / span[ok]
    return float(np.sqrt(np.sum(diff**2)))


def _distance_matrix(
    pop: list[EvaluatedIndividual], cfg: SharingConfig, n_objectives: int
) -> np.ndarray:
    if cfg.space is SharingSpace.DECISION:
        bits = np.array([ind.chromosome for ind in pop], dtype=bool)
        hamming = (bits[:, None, :] != bits[None, :, :]).mean(axis=2)
        return np.sqrt(hamming)
    values = objective_matrix(pop, n_objectives)
    span = values.max(axis=0) - values.min(axis=0)
    scaled = np.zeros_like(values)
    ok = span > 0
    scaled[:, ok] = values[:, ok] / span[ok]
    diff = scaled[:, None, :] - scaled[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def sharing_value(distance: float, cfg: SharingConfig) -> float:
    """Sharing function ``1 - (d / sigma) ** alpha`` (positive inside a niche)."""
    return 1.0 - (distance / cfg.sigma) ** cfg.alpha


def form_clusters(
    pop: list[EvaluatedIndividual],
    cfg: SharingConfig,
    n_objectives: int = 3,
    distances: np.ndarray | None = None,
) -> list[Cluster]:
    """Leader clustering over descending rank fitness (ties by index).

    An individual joins *every* existing cluster whose centroid lies closer
    than ``sigma``; if none does, it founds a new cluster.  Every individual
    therefore belongs to at least one cluster.
    """
    if not pop:
        return []
    if distances is None:
        distances = _distance_matrix(pop, cfg, n_objectives)
    fitness = np.array([ind.fitness for ind in pop])
    order = np.argsort(-fitness, kind="stable")

    clusters: list[Cluster] = []
    for i in order:
        joined = False
        for cluster in clusters:
            if distances[i, cluster.centroid_index] < cfg.sigma:
                cluster.member_indices.append(int(i))
                joined = True
        if not joined:
            clusters.append(Cluster(centroid_index=int(i), member_indices=[int(i)]))
    return clusters


def shared_fitness(
    pop: list[EvaluatedIndividual],
    clusters: list[Cluster],
    cfg: SharingConfig,
    n_objectives: int = 3,
    distances: np.ndarray | None = None,
) -> list[EvaluatedIndividual]:
    """Penalize fitness multiplicatively per containing cluster.

    For each cluster containing the individual (in creation order) the
    current value is multiplied by ``(d / sigma) ** alpha``, the complement
    of the sharing function.  The individual's own cluster (where it is the
    centroid) is exempt, so isolated individuals keep their rank fitness.
    """
    if not pop:
        return pop
    if distances is None:
        distances = _distance_matrix(pop, cfg, n_objectives)
    for ind in pop:
        ind.shared_fitness = ind.fitness
    for cluster in clusters:
        c = cluster.centroid_index
        for i in cluster.member_indices:
            if i == c:
                continue
            factor = (distances[i, c] / cfg.sigma) ** cfg.alpha
            pop[i].shared_fitness *= max(factor, MIN_PENALTY_FACTOR)
    return pop


def normalize_fitness(pop: list[EvaluatedIndividual]) -> list[EvaluatedIndividual]:
    """Redistribute each rank's fitness proportionally to shared fitness:
    ``f'' = f * f' / sum(f' over the same rank)``."""
    if not pop:
        return pop
    totals: dict[int, float] = {}
    for ind in pop:
        totals[ind.rank] = totals.get(ind.rank, 0.0) + ind.shared_fitness
    for ind in pop:
        ind.normalized_fitness = ind.fitness * ind.shared_fitness / totals[ind.rank]
    return pop


def evaluate_population_fitness(
    pop: list[EvaluatedIndividual],
    sharing: SharingConfig,
    n_objectives: int = 3,
    n: int | None = None,
) -> list[EvaluatedIndividual]:
    """Run ranks -> rank fitness -> clustering -> shared -> normalized."""
    if not pop:
        return pop
    assign_ranks(pop, n_objectives)
    rank_fitness(pop, n)
    distances = _distance_matrix(pop, sharing, n_objectives)
    clusters = form_clusters(pop, sharing, n_objectives, distances)
    shared_fitness(pop, clusters, sharing, n_objectives, distances)
    normalize_fitness(pop)
    return pop
