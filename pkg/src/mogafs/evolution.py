"""Multi-objective GA engine with evolutionary local improvement.

The main loop evolves fixed-length bit chromosomes over the full feature
space.  Periodically the best few individuals become *templates*: each
template's active positions define a reduced search space in which a
subordinate population is evolved with the same machinery, and the results
are merged back through one of three replacement strategies (parent,
complete, selection).  An external archive accumulates every non-dominated
solution seen during the run.

Determinism: every stochastic step draws from generators derived from the
configured seed, and chromosome evaluation is content-seeded (see
:mod:`mogafs.objectives`), so a run is reproducible bit-for-bit regardless
of evaluation thread count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .data import DataLike
from .frontier import ParetoFront, front_from_members, r1hat_score
from .objectives import ObjectiveConfig, ObjectiveVector, evaluate_chromosome
from .pareto import (
    EvaluatedIndividual,
    SharingConfig,
    dominates,
    evaluate_population_fitness,
)
from .seeding import chromosome_key, derive_rng


class ReplacementStrategy(str, Enum):
    """How subordinate results re-enter the main population."""

    PARENT = "parent"
    COMPLETE = "complete"
    SELECTION = "selection"


DEFAULT_TIERS = ((0.55, 0.03), (0.30, 0.15), (0.15, 0.35))


@dataclass(frozen=True)
class GAConfig:
    """Knobs of the evolutionary engine.

    ``staggered_tiers`` is a list of (population fraction, active-gene
    fraction) pairs; fractions must sum to one.  ``n_subordinate`` templates
    undergo local improvement every ``sub_every`` generations; set it to 0
    for a plain multi-objective GA.  When
    ``subordinate_gens_consume_budget`` is true, generations spent in
    subordinate populations count against ``generations``; otherwise they
    are only reported in the trace.
    """

    pop_size: int = 90
    generations: int = 300
    crossover_rate: float = 0.9
    mutation_rate: float = 0.15
    elite_count: int = 10
    generational_gap: int = 10
    staggered_tiers: tuple[tuple[float, float], ...] = DEFAULT_TIERS
    sub_pop_size: int = 50
    sub_generations: int = 70
    n_subordinate: int = 3
    sub_every: int = 5
    replacement_strategy: ReplacementStrategy = ReplacementStrategy.PARENT
    subordinate_gens_consume_budget: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.pop_size < 1:
            raise ValueError(f"pop_size must be >= 1, got {self.pop_size}")
        if self.generations < 0:
            raise ValueError(f"generations must be >= 0, got {self.generations}")
        for name in ("crossover_rate", "mutation_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {rate}")
        for name in ("elite_count", "generational_gap", "sub_pop_size",
                     "sub_generations", "n_subordinate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.elite_count + self.generational_gap > self.pop_size:
            raise ValueError(
                f"elite_count + generational_gap = "
                f"{self.elite_count + self.generational_gap} exceeds pop_size {self.pop_size}"
            )
        if self.sub_every < 1:
            raise ValueError(f"sub_every must be >= 1, got {self.sub_every}")
        total = sum(frac for frac, _ in self.staggered_tiers)
        if not math.isclose(total, 1.0, abs_tol=1e-9):
            raise ValueError(f"staggered tier fractions must sum to 1, got {total}")
        for _, active in self.staggered_tiers:
            if not 0.0 <= active <= 1.0:
                raise ValueError(f"tier active fraction {active} outside [0, 1]")


@dataclass
class TraceRecord:
    generation: int
    best_uar: float
    median_uar: float
    best_n_selected: int
    front_size: int
    evals_cumulative: int
    subordinate_generations_cumulative: int
    wall_seconds: float


@dataclass
class RunTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class SubordinateResult:
    """Outcome of improving one template: the best decoded individual plus
    the whole final subordinate population in full-space coordinates."""

    best: EvaluatedIndividual
    final_population: list[EvaluatedIndividual]
    generations_used: int


@dataclass
class RunResult:
    population: list[EvaluatedIndividual]
    population_front: ParetoFront
    archive_front: ParetoFront
    trace: RunTrace
    run_id: str


def _repair(bits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Guarantee at least one active bit."""
    if not bits.any():
        bits[int(rng.integers(0, len(bits)))] = True
    return bits


def random_chromosome(n_features: int, n_active: int, rng: np.random.Generator) -> np.ndarray:
    bits = np.zeros(n_features, dtype=bool)
    chosen = rng.choice(n_features, size=min(max(n_active, 1), n_features), replace=False)
    bits[chosen] = True
    return bits


def staggered_init(n_features: int, cfg: GAConfig, rng: np.random.Generator) -> list[np.ndarray]:
    """Tiered random initialization with different active-gene densities.

    Tier sizes are ``floor(fraction * pop_size)`` with the remainder going to
    the last tier; within a tier each chromosome gets
    ``round(active_fraction * n_features)`` distinct active bits (minimum 1).
    """
    sizes = [int(fraction * cfg.pop_size) for fraction, _ in cfg.staggered_tiers]
    sizes[-1] += cfg.pop_size - sum(sizes)
    population: list[np.ndarray] = []
    for (_, active_fraction), size in zip(cfg.staggered_tiers, sizes):
        n_active = max(1, round(active_fraction * n_features))
        for _ in range(size):
            population.append(random_chromosome(n_features, n_active, rng))
    return population


def roulette_select(
    pop: list[EvaluatedIndividual], k: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``k`` indices with replacement, proportional to normalized fitness."""
    weights = np.array([ind.normalized_fitness for ind in pop], dtype=np.float64)
    if (weights <= 0).any():
        raise ValueError("roulette selection requires strictly positive fitness")
    return rng.choice(len(pop), size=k, replace=True, p=weights / weights.sum())


def crossover(
    a: np.ndarray, b: np.ndarray, rate: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Single-point crossover with probability ``rate``, else copies.

    Children are repaired to keep at least one active bit.
    """
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if len(a) != len(b):
        raise ValueError(f"parent lengths differ: {len(a)} vs {len(b)}")
    recombine = rng.random() < rate
    if recombine and len(a) >= 2:
        cut = int(rng.integers(1, len(a)))
        c1 = np.concatenate([a[:cut], b[cut:]])
        c2 = np.concatenate([b[:cut], a[cut:]])
    else:
        c1, c2 = a.copy(), b.copy()
    return _repair(c1, rng), _repair(c2, rng)


def mutate(x: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    """With probability ``rate``, flip each bit independently with
    probability ``1 / len(x)``; repair to at least one active bit."""
    x = np.asarray(x, dtype=bool).copy()
    if rng.random() < rate:
        flips = rng.random(len(x)) < 1.0 / len(x)
        x ^= flips
    return _repair(x, rng)


def elitist_replace(
    old: list[EvaluatedIndividual],
    offspring: list[np.ndarray],
    cfg: GAConfig,
    rng: np.random.Generator,
    elite_count: int | None = None,
    generational_gap: int | None = None,
) -> list[np.ndarray]:
    """Compose the next generation's chromosomes.

    Top ``elite_count`` of the old population by normalized fitness (ties by
    index), plus ``generational_gap`` members roulette-selected from the old
    population, plus offspring filling the remainder.
    """
    elite_count = cfg.elite_count if elite_count is None else elite_count
    generational_gap = cfg.generational_gap if generational_gap is None else generational_gap
    pop_size = len(old)
    needed = pop_size - elite_count - generational_gap
    if len(offspring) < needed:
        raise ValueError(f"need {needed} offspring, got {len(offspring)}")

    fitness = np.array([ind.normalized_fitness for ind in old])
    elite_idx = np.argsort(-fitness, kind="stable")[:elite_count]
    new_bits = [old[i].chromosome.copy() for i in elite_idx]
    if generational_gap > 0:
        for i in roulette_select(old, generational_gap, rng):
            new_bits.append(old[i].chromosome.copy())
    new_bits.extend(offspring[:needed])
    return new_bits


def spawn_subordinate(
    template: np.ndarray, sub_size: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Initial subordinate population over the template's active positions.

    Chromosomes have length ``N_s`` (the template's active-bit count); each
    bit is active with probability 0.5, repaired to at least one.  The
    template's own image (all ones) is injected as the first member.
    """
    n_s = int(np.asarray(template, dtype=bool).sum())
    if n_s < 1:
        raise ValueError("template selects no features")
    members = [np.ones(n_s, dtype=bool)]
    for _ in range(sub_size - 1):
        members.append(_repair(rng.random(n_s) < 0.5, rng))
    return members


def decode_subordinate(template: np.ndarray, sub_bits: np.ndarray) -> np.ndarray:
    """Map reduced-space bits back to full-length coordinates."""
    full = np.zeros(len(template), dtype=bool)
    positions = np.flatnonzero(template)
    full[positions[np.asarray(sub_bits, dtype=bool)]] = True
    return full


class Evaluator:
    """Caching, optionally threaded chromosome evaluator.

    Objective vectors are pure functions of the bit pattern, so results are
    cached by chromosome content; ``evaluations_requested`` counts every
    individual submitted (cache hits included), which keeps trace numbers
    independent of caching internals.
    """

    def __init__(self, dataset: DataLike, cfg: ObjectiveConfig, threads: int = 1):
        self.dataset = dataset
        self.cfg = cfg
        self.threads = max(1, threads)
        self.evaluations_requested = 0
        self._cache: dict[bytes, ObjectiveVector] = {}
        self._executor: ThreadPoolExecutor | None = None

    def evaluate_bits(self, bits_list: list[np.ndarray]) -> list[ObjectiveVector]:
        self.evaluations_requested += len(bits_list)
        keys = [chromosome_key(b) for b in bits_list]
        missing: dict[bytes, np.ndarray] = {}
        for key, bits in zip(keys, bits_list):
            if key not in self._cache and key not in missing:
                missing[key] = bits
        if missing:
            todo = list(missing.items())
            if self.threads > 1 and len(todo) > 1:
                if self._executor is None:
                    self._executor = ThreadPoolExecutor(max_workers=self.threads)
                results = self._executor.map(
                    lambda item: evaluate_chromosome(item[1], self.dataset, self.cfg), todo
                )
            else:
                results = (evaluate_chromosome(bits, self.dataset, self.cfg) for _, bits in todo)
            for (key, _), obj in zip(todo, results):
                self._cache[key] = obj
        return [self._cache[key] for key in keys]

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None


class Archive:
    """All-time non-dominated set over the active objectives."""

    def __init__(self, n_objectives: int):
        self.n_objectives = n_objectives
        self.items: list[tuple[np.ndarray, ObjectiveVector]] = []
        self._keys: set[bytes] = set()

    def add(self, bits: np.ndarray, obj: ObjectiveVector) -> bool:
        key = chromosome_key(bits)
        if key in self._keys:
            return False
        if any(dominates(other, obj, self.n_objectives) for _, other in self.items):
            return False
        survivors = []
        for item in self.items:
            if dominates(obj, item[1], self.n_objectives):
                self._keys.discard(chromosome_key(item[0]))
            else:
                survivors.append(item)
        survivors.append((bits.copy(), obj))
        self.items = survivors
        self._keys.add(key)
        return True

    def add_population(self, pop: list[EvaluatedIndividual]) -> None:
        for ind in pop:
            self.add(ind.chromosome, ind.objectives)

    def front(self, run_id: str = "", generation: int = 0) -> ParetoFront:
        return front_from_members(self.items, self.n_objectives, run_id, generation)


def _make_offspring(
    pop: list[EvaluatedIndividual], count: int, cfg: GAConfig, rng: np.random.Generator
) -> list[np.ndarray]:
    if count <= 0:
        return []
    n_pairs = (count + 1) // 2
    parents = roulette_select(pop, 2 * n_pairs, rng)
    children: list[np.ndarray] = []
    for p in range(n_pairs):
        a = pop[parents[2 * p]].chromosome
        b = pop[parents[2 * p + 1]].chromosome
        c1, c2 = crossover(a, b, cfg.crossover_rate, rng)
        children.append(mutate(c1, cfg.mutation_rate, rng))
        children.append(mutate(c2, cfg.mutation_rate, rng))
    return children[:count]


def _scaled_counts(cfg: GAConfig, sub_size: int) -> tuple[int, int]:
    """Elite/gap counts for a subordinate run, scaled to its population size."""
    if cfg.pop_size <= 0 or sub_size <= 1:
        return 0, 0
    elite = max(1, int(cfg.elite_count * sub_size / cfg.pop_size))
    gap = int(cfg.generational_gap * sub_size / cfg.pop_size)
    while elite + gap > sub_size - 1 and gap > 0:
        gap -= 1
    while elite + gap > sub_size - 1 and elite > 1:
        elite -= 1
    return elite, gap


def _best_by_compact_accuracy(pop: list[EvaluatedIndividual], n_features: int) -> int:
    """Index of the member maximizing the distance-to-ideal grade on
    (validation UAR, raw cardinality ratio); ties by fewer features, index."""
    best, best_key = 0, None
    for i, ind in enumerate(pop):
        cr = (n_features - ind.objectives.n_selected) / n_features
        key = (-r1hat_score(ind.objectives.uar, cr), ind.objectives.n_selected, i)
        if best_key is None or key < best_key:
            best, best_key = i, key
    return best


def evolve_subordinate(
    template: np.ndarray,
    evaluator: Evaluator,
    cfg: GAConfig,
    sharing: SharingConfig,
    rng: np.random.Generator,
) -> SubordinateResult:
    """Evolve a subordinate population in the template's active subspace.

    Evaluation decodes each reduced chromosome to full-space coordinates and
    uses the shared evaluator; sharing distances are measured in the reduced
    decision space without rescaling sigma.
    """
    template = np.asarray(template, dtype=bool)
    n_obj = evaluator.cfg.n_objectives
    sub_size = cfg.sub_pop_size
    elite, gap = _scaled_counts(cfg, sub_size)

    bits = spawn_subordinate(template, sub_size, rng)

    def evaluated(blist: list[np.ndarray]) -> list[EvaluatedIndividual]:
        decoded = [decode_subordinate(template, b) for b in blist]
        objs = evaluator.evaluate_bits(decoded)
        return [EvaluatedIndividual(b, o) for b, o in zip(blist, objs)]

    pop = evaluated(bits)
    evaluate_population_fitness(pop, sharing, n_obj)
    for _ in range(cfg.sub_generations):
        children = _make_offspring(pop, sub_size - elite - gap, cfg, rng)
        new_bits = elitist_replace(pop, children, cfg, rng, elite, gap)
        pop = evaluated(new_bits)
        evaluate_population_fitness(pop, sharing, n_obj)

    decoded_pop = [
        EvaluatedIndividual(
            decode_subordinate(template, ind.chromosome),
            ind.objectives,
            ind.rank,
            ind.fitness,
            ind.shared_fitness,
            ind.normalized_fitness,
        )
        for ind in pop
    ]
    best = decoded_pop[_best_by_compact_accuracy(decoded_pop, len(template))]
    return SubordinateResult(
        best=best,
        final_population=decoded_pop,
        generations_used=cfg.sub_generations,
    )


def _weak_pareto_improves(new: ObjectiveVector, old: ObjectiveVector) -> bool:
    """Accuracy or feature count improves without degrading the other."""
    no_worse = new.uar >= old.uar and new.n_selected <= old.n_selected
    better = new.uar > old.uar or new.n_selected < old.n_selected
    return no_worse and better


def apply_replacement(
    pop: list[EvaluatedIndividual],
    parent_indices: list[int],
    results: list[SubordinateResult],
    strategy: ReplacementStrategy,
    cfg: GAConfig,
    sharing: SharingConfig,
    n_objectives: int,
    rng: np.random.Generator,
) -> list[EvaluatedIndividual]:
    """Merge subordinate results into the main population."""
    if strategy is ReplacementStrategy.PARENT:
        new_pop = list(pop)
        for idx, result in zip(parent_indices, results):
            if _weak_pareto_improves(result.best.objectives, pop[idx].objectives):
                new_pop[idx] = EvaluatedIndividual(
                    result.best.chromosome.copy(), result.best.objectives
                )
        return new_pop

    pool = [EvaluatedIndividual(ind.chromosome, ind.objectives) for ind in pop]
    for result in results:
        pool.extend(
            EvaluatedIndividual(ind.chromosome, ind.objectives)
            for ind in result.final_population
        )
    evaluate_population_fitness(pool, sharing, n_objectives, n=len(pool))
    if strategy is ReplacementStrategy.COMPLETE:
        fitness = np.array([ind.normalized_fitness for ind in pool])
        keep = np.argsort(-fitness, kind="stable")[: len(pop)]
        return [pool[i] for i in keep]
    if strategy is ReplacementStrategy.SELECTION:
        weights = np.array([ind.normalized_fitness for ind in pool])
        keep = rng.choice(len(pool), size=len(pop), replace=False, p=weights / weights.sum())
        return [pool[i] for i in keep]
    raise ValueError(f"unknown replacement strategy {strategy!r}")


def _pick_improvement_parents(pop: list[EvaluatedIndividual], n: int) -> list[int]:
    """Indices of the best individuals to use as templates: highest
    normalized fitness, ties by fewer features then index; duplicates of the
    same bit pattern are skipped."""
    order = sorted(
        range(len(pop)),
        key=lambda i: (
            -pop[i].normalized_fitness,
            pop[i].objectives.n_selected,
            i,
        ),
    )
    chosen: list[int] = []
    seen: set[bytes] = set()
    for i in order:
        key = chromosome_key(pop[i].chromosome)
        if key in seen:
            continue
        seen.add(key)
        chosen.append(i)
        if len(chosen) == n:
            break
    return chosen


def run(
    dataset: DataLike,
    ga: GAConfig,
    objectives: ObjectiveConfig,
    sharing: SharingConfig,
    threads: int = 1,
    run_id: str = "run",
) -> RunResult:
    """Execute the full optimization loop on a dataset.

    Per generation: roulette selection, single-point crossover, bit-flip
    mutation, elitist replacement, population evaluation; every
    ``sub_every`` generations the ``n_subordinate`` best individuals seed
    subordinate populations whose evolved results re-enter the population
    via the configured replacement strategy.
    """
    n_obj = objectives.n_objectives
    rng = derive_rng(ga.seed, "main-loop")
    evaluator = Evaluator(dataset, objectives, threads)
    trace = RunTrace()
    archive = Archive(n_obj)
    started = time.perf_counter()

    try:
        bits = staggered_init(dataset.n_features, ga, rng)
        objs = evaluator.evaluate_bits(bits)
        pop = [EvaluatedIndividual(b, o) for b, o in zip(bits, objs)]
        evaluate_population_fitness(pop, sharing, n_obj)
        archive.add_population(pop)

        sub_gens_total = 0
        generation = 0
        while generation < ga.generations:
            if ga.subordinate_gens_consume_budget and generation + sub_gens_total >= ga.generations:
                break
            generation += 1

            n_children = ga.pop_size - ga.elite_count - ga.generational_gap
            children = _make_offspring(pop, n_children, ga, rng)
            new_bits = elitist_replace(pop, children, ga, rng)
            objs = evaluator.evaluate_bits(new_bits)
            pop = [EvaluatedIndividual(b, o) for b, o in zip(new_bits, objs)]
            evaluate_population_fitness(pop, sharing, n_obj)
            archive.add_population(pop)

            improve = ga.n_subordinate > 0 and generation % ga.sub_every == 0
            if improve:
                parent_indices = _pick_improvement_parents(pop, ga.n_subordinate)
                results = []
                for slot, idx in enumerate(parent_indices):
                    sub_rng = derive_rng(ga.seed, "subordinate", generation, slot)
                    results.append(
                        evolve_subordinate(
                            pop[idx].chromosome, evaluator, ga, sharing, sub_rng
                        )
                    )
                    sub_gens_total += results[-1].generations_used
                    archive.add_population(results[-1].final_population)
                pop = apply_replacement(
                    pop, parent_indices, results, ga.replacement_strategy,
                    ga, sharing, n_obj, rng,
                )
                evaluate_population_fitness(pop, sharing, n_obj)
                archive.add_population(pop)

            uars = np.array([ind.objectives.uar for ind in pop])
            sizes = np.array([ind.objectives.n_selected for ind in pop])
            trace.records.append(
                TraceRecord(
                    generation=generation,
                    best_uar=float(uars.max()),
                    median_uar=float(np.median(uars)),
                    best_n_selected=int(sizes.min()),
                    front_size=sum(1 for ind in pop if ind.rank == 1),
                    evals_cumulative=evaluator.evaluations_requested,
                    subordinate_generations_cumulative=sub_gens_total,
                    wall_seconds=time.perf_counter() - started,
                )
            )
    finally:
        evaluator.close()

    population_front = front_from_members(
        [(ind.chromosome, ind.objectives) for ind in pop if ind.rank == 1],
        n_obj,
        run_id,
        generation,
    )
    return RunResult(
        population=pop,
        population_front=population_front,
        archive_front=archive.front(run_id, generation),
        trace=trace,
        run_id=run_id,
    )
