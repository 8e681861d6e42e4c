"""Acceptance suite: one test per release criterion.

Each test prints a single [PASS]/[SKIP] line (visible with ``pytest -s`` or
on failure) and pins the tolerances stated in the project requirements.
Criteria 6-8 run the engine at desk scale with frozen seeds; their dataset
and budget choices were fixed by calibration runs and are deterministic.
"""

import json
import os

import numpy as np
import pytest

from mogafs.baselines import SyntheticSpec, generate_synthetic
from mogafs.data import SplitSpec, load_csv, stratified_split
from mogafs.evolution import GAConfig, ReplacementStrategy, run
from mogafs.experiments import compare_methods, parse_config, run_experiment
from mogafs.frontier import attach_test_uar, representative_r1hat
from mogafs.objectives import ObjectiveConfig, cardinality_ratio, evaluate_chromosome, \
    objective2_sigmoid, objective3_distance
from mogafs.pareto import (
    EvaluatedIndividual,
    SharingConfig,
    assign_ranks,
    evaluate_population_fitness,
    rank_fitness,
)
from mogafs.objectives import ObjectiveVector
from mogafs.seeding import derive_seed


def ok(num: int, text: str) -> None:
    print(f"[PASS] criterion {num}: {text}")


def brute_force_dominator_counts(values: np.ndarray) -> np.ndarray:
    n, m = values.shape
    counts = np.zeros(n, dtype=int)
    for i in range(n):
        vi = values[i]
        for j in range(n):
            if i == j:
                continue
            vj = values[j]
            ge = True
            gt = False
            for k in range(m):
                if vj[k] < vi[k]:
                    ge = False
                    break
                if vj[k] > vi[k]:
                    gt = True
            if ge and gt:
                counts[i] += 1
    return counts


def population_from(values: np.ndarray) -> list[EvaluatedIndividual]:
    pop = []
    for row in values:
        padded = (list(row) + [0.0, 0.0])[:3]
        obj = ObjectiveVector(
            uar=float(padded[0]), cr_mapped=float(padded[1]),
            m_dist=float(padded[2]), n_selected=1,
        )
        pop.append(EvaluatedIndividual(np.ones(4, bool), obj))
    return pop


def test_criterion_1_fitness_formula_anchor():
    """Rank-based fitness at N=10 with rank sizes (2, 3, 4): value 3.5."""
    ranks = [1, 1, 2, 2, 2, 3, 3, 3, 3, 4]
    pop = population_from(np.zeros((10, 3)))
    for ind, r in zip(pop, ranks):
        ind.rank = r
    rank_fitness(pop, 10)
    rank3 = [ind.fitness for ind in pop if ind.rank == 3]
    assert rank3 == [3.5, 3.5, 3.5, 3.5]
    ok(1, "rank-3 fitness equals 3.5 exactly for N=10, n1=2, n2=3, n3=4")


def test_criterion_2_dominance_rank_oracle():
    """assign_ranks matches brute-force dominator counts on 200 random
    populations (sizes 5-200, 2-3 objectives)."""
    rng = np.random.default_rng(2024)
    for trial in range(200):
        n = int(rng.integers(5, 201))
        m = int(rng.integers(2, 4))
        values = rng.random((n, m))
        if trial % 3 == 0:  # inject ties and duplicates
            dup = rng.integers(0, n, size=n // 4)
            values[dup] = values[int(rng.integers(0, n))]
        pop = population_from(values)
        assign_ranks(pop, m)
        oracle = brute_force_dominator_counts(values)
        got = np.array([ind.rank for ind in pop])
        np.testing.assert_array_equal(got, oracle + 1)
    ok(2, "ranks match the brute-force dominator count on 200 random populations")


def test_criterion_3_distance_objective_bounds():
    """Separability score hits +1/-1 on the extreme constructions and stays
    inside [-1, 1] on 100 random binary datasets."""
    from mogafs.data import Dataset

    perfect = Dataset(
        X=np.array([[0, 0, 0], [0, 0, 0], [1, 1, 1], [1, 1, 1]], dtype=float),
        y=np.array([0, 0, 1, 1]),
        label_names=("a", "b"),
    )
    assert objective3_distance(np.ones(3, bool), perfect, 32, seed=1) == 1.0

    inverted = Dataset(
        X=np.array([[0, 0], [1, 1], [0, 0], [1, 1]], dtype=float),
        y=np.array([0, 0, 1, 1]),
        label_names=("a", "b"),
    )
    assert objective3_distance(np.ones(2, bool), inverted, 32, seed=2) == -1.0

    rng = np.random.default_rng(3)
    for trial in range(100):
        n = int(rng.integers(6, 40))
        k = int(rng.integers(1, 8))
        X = (rng.random((n, k)) < rng.uniform(0.2, 0.8)).astype(float)
        y = (np.arange(n) % 2).astype(np.int64)
        from mogafs.data import Dataset as D

        d = D(X=X, y=y, label_names=("a", "b"))
        value = objective3_distance(np.ones(k, bool), d, 64, seed=trial)
        assert -1.0 <= value <= 1.0
    ok(3, "separability score is exact at the extremes and bounded on 100 random datasets")


def test_criterion_4_sigmoid_ordering_invariance():
    """Argmax under the sigmoid map equals argmax under the raw ratio for
    lam in {0.5, 1.5, 15} on 100 random chromosome sets."""
    rng = np.random.default_rng(4)
    for _ in range(100):
        size = int(rng.integers(2, 25))
        chroms = []
        for _ in range(size):
            bits = rng.random(80) < rng.uniform(0.02, 0.95)
            if not bits.any():
                bits[int(rng.integers(0, 80))] = True
            chroms.append(bits)
        raw = np.array([cardinality_ratio(c) for c in chroms])
        for lam in (0.5, 1.5, 15.0):
            mapped = np.array([objective2_sigmoid(c, lam, -0.5) for c in chroms])
            assert int(mapped.argmax()) == int(raw.argmax())
    ok(4, "sigmoid and raw cardinality ratio agree on the argmax for lam in {0.5, 1.5, 15}")


def test_criterion_5_sharing_pipeline_identities():
    """Within every rank the normalized fitness sums to the rank's common
    fitness; at sigma -> 0 the pipeline degenerates to the no-sharing form."""
    rng = np.random.default_rng(5)
    for trial in range(100):
        n = int(rng.integers(3, 60))
        n_bits = int(rng.integers(8, 40))
        pop = []
        for _ in range(n):
            bits = rng.random(n_bits) < 0.5
            if not bits.any():
                bits[0] = True
            obj = ObjectiveVector(
                uar=float(rng.random()), cr_mapped=float(rng.random()),
                m_dist=float(rng.random() * 2 - 1), n_selected=int(bits.sum()),
            )
            pop.append(EvaluatedIndividual(bits, obj))
        evaluate_population_fitness(pop, SharingConfig(sigma=0.3), 3)
        per_rank: dict[int, list[EvaluatedIndividual]] = {}
        for ind in pop:
            per_rank.setdefault(ind.rank, []).append(ind)
        for members in per_rank.values():
            total = sum(m.normalized_fitness for m in members)
            assert abs(total - members[0].fitness) < 1e-9

    # Limit check on tie-free decision vectors: one hot bit per individual.
    for trial in range(20):
        n = int(rng.integers(3, 40))
        pop = []
        for i in range(n):
            bits = np.zeros(n, bool)
            bits[i] = True
            obj = ObjectiveVector(
                uar=float(rng.random()), cr_mapped=float(rng.random()),
                m_dist=float(rng.random()), n_selected=1,
            )
            pop.append(EvaluatedIndividual(bits, obj))
        evaluate_population_fitness(pop, SharingConfig(sigma=1e-12), 3)
        counts: dict[int, int] = {}
        for ind in pop:
            counts[ind.rank] = counts.get(ind.rank, 0) + 1
        for ind in pop:
            assert abs(ind.normalized_fitness - ind.fitness / counts[ind.rank]) < 1e-9
    ok(5, "per-rank normalized fitness sums to the rank fitness; sigma->0 limit matches")


# Frozen by calibration: noise 0.3 at 150 samples gives full recovery with
# margin on every seed.
FRONT_ORACLE_SPEC = SyntheticSpec(
    n_samples=150, n_features=8, n_informative=3, noise_level=0.3, seed=77
)


def exhaustive_front_pairs(dataset, cfg) -> set[tuple[float, int]]:
    points = []
    for value in range(1, 256):
        mask = np.array([(value >> i) & 1 for i in range(8)], bool)
        ov = evaluate_chromosome(mask, dataset, cfg)
        points.append((ov.uar, ov.n_selected))
    front = set()
    for u, n in points:
        dominated = any(
            (u2 >= u and n2 <= n and (u2 > u or n2 < n)) for u2, n2 in points
        )
        if not dominated:
            front.add((u, n))
    return front


def criterion6_ga(seed: int) -> GAConfig:
    return GAConfig(
        pop_size=40, generations=60, elite_count=10, generational_gap=10,
        sub_pop_size=20, sub_generations=15, n_subordinate=2, sub_every=5,
        replacement_strategy=ReplacementStrategy.PARENT, seed=seed,
    )


def test_criterion_6_exhaustive_front_oracle():
    """The engine recovers >= 80% of the exhaustive 255-subset front's
    (UAR, n_selected) points in at least 4 of 5 seeds."""
    dataset, _ = generate_synthetic(FRONT_ORACLE_SPEC)
    hits = 0
    recoveries = []
    for s in range(5):
        cfg = ObjectiveConfig(base_seed=1000 + s)
        truth = exhaustive_front_pairs(dataset, cfg)
        result = run(dataset, criterion6_ga(s), cfg, SharingConfig())
        found = {
            (m.objectives.uar, m.objectives.n_selected)
            for m in result.archive_front.members
        }
        recovery = len(truth & found) / len(truth)
        recoveries.append(round(recovery, 3))
        if recovery >= 0.8:
            hits += 1
    assert hits >= 4, f"recoveries per seed: {recoveries}"
    ok(6, f"front recovery >= 80% in {hits}/5 seeds (rates: {recoveries})")


# Frozen by calibration: the 4-class, 320-sample planted problem shows a
# consistent local-improvement margin at this budget across experiment seeds.
PLANTED100_SPEC = {
    "n_samples": 320, "n_features": 100, "n_informative": 5,
    "n_classes": 4, "noise_level": 0.5, "seed": 55,
}
IMPROVEMENT_GA = dict(
    pop_size=30, generations=30, elite_count=5, generational_gap=5,
    sub_pop_size=20, sub_generations=12, sub_every=5,
)


def median_r1hat_over_seeds(n_subordinate: int) -> float:
    dataset, _ = generate_synthetic(SyntheticSpec(**PLANTED100_SPEC))
    pool, test = stratified_split(
        dataset, SplitSpec(0.2, seed=derive_seed(99, "test-split"))
    )
    scores = []
    for s in range(5):
        seed = derive_seed(99, "replication", s)
        ga = GAConfig(
            n_subordinate=n_subordinate,
            replacement_strategy=ReplacementStrategy.PARENT,
            seed=seed, **IMPROVEMENT_GA,
        )
        cfg = ObjectiveConfig(base_seed=seed)
        result = run(pool, ga, cfg, SharingConfig())
        front = attach_test_uar(result.archive_front, pool, test, cfg)
        _, score = representative_r1hat(front)
        scores.append(score)
    return float(np.median(scores))


def test_criterion_7_local_improvement_efficacy():
    """Median grade over 5 seeds is strictly higher with three subordinate
    populations (parent replacement) than with none."""
    with_improvement = median_r1hat_over_seeds(3)
    without = median_r1hat_over_seeds(0)
    assert with_improvement > without, (
        f"median grade with local improvement {with_improvement:.4f} "
        f"not above plain GA {without:.4f}"
    )
    ok(7, f"median grade {with_improvement:.4f} (3 subordinates/PR) > {without:.4f} (none)")


def test_criterion_8_baseline_comparison_shape(tmp_path):
    """The engine's median test UAR is within 0.02 of the best baseline and
    its subset stays within twice the planted feature count."""
    raw = {
        "dataset": {"synthetic": dict(PLANTED100_SPEC)},
        "seed": 99,
        "replications": 5,
        "test_fraction": 0.2,
        "output_dir": str(tmp_path / "cmp"),
        "ga": {
            "pop_size": 40, "generations": 60, "elite_count": 8, "generational_gap": 8,
            "sub_pop_size": 20, "sub_generations": 12, "sub_every": 5,
            "n_subordinate": 3, "replacement_strategy": "parent",
        },
        "compare": {"max_subset_size": 10},
    }
    report = compare_methods(parse_config(raw))
    stats = report["methods"]
    engine_uar = stats["mogafs"]["median_uar_test"]
    best_baseline = max(
        stats["mi_ranking"]["median_uar_test"], stats["sfs"]["median_uar_test"]
    )
    assert engine_uar >= best_baseline - 0.02, (
        f"engine UAR {engine_uar:.4f} below baseline envelope {best_baseline:.4f} - 0.02"
    )
    assert stats["mogafs"]["median_n_selected"] <= 2 * PLANTED100_SPEC["n_informative"]
    ok(8, (
        f"engine UAR {engine_uar:.4f} vs best baseline {best_baseline:.4f}, "
        f"median subset {stats['mogafs']['median_n_selected']:.0f} <= 10"
    ))


DERMATOLOGY_PATHS = [
    os.environ.get("MOGAFS_DERMATOLOGY_CSV", ""),
    os.path.join(os.path.dirname(__file__), "data", "dermatology.csv"),
]


def dermatology_file() -> str | None:
    for path in DERMATOLOGY_PATHS:
        if path and os.path.exists(path):
            return path
    return None


@pytest.mark.skipif(
    dermatology_file() is None,
    reason="dermatology CSV not present (set MOGAFS_DERMATOLOGY_CSV to enable)",
)
def test_criterion_9_dermatology_envelope(tmp_path):
    """Optional dataset-anchored check: with the default configuration
    scaled to 100 generations, median test UAR >= 0.85 with <= 12 features
    over 5 seeds."""
    path = dermatology_file()
    dataset = load_csv(path)
    assert dataset.n_features == 34
    assert dataset.class_count == 6

    raw = {
        "dataset": {"csv": path},
        "seed": 99,
        "replications": 5,
        "test_fraction": 0.2,
        "output_dir": str(tmp_path / "derm"),
        "ga": {"generations": 100},
    }
    result = run_experiment(parse_config(raw))
    assert result.summary.median_uar >= 0.85
    assert result.summary.median_n_selected <= 12
    ok(9, (
        f"dermatology median UAR {result.summary.median_uar:.3f} with "
        f"{result.summary.median_n_selected:.0f} features"
    ))


def test_criterion_10_thread_count_determinism(tmp_path):
    """Identical seeds yield byte-identical front.csv and summary.json
    regardless of the thread count (run at the criterion-6 scale)."""
    outputs = {}
    for threads in (1, 3):
        raw = {
            "dataset": {
                "synthetic": {
                    "n_samples": FRONT_ORACLE_SPEC.n_samples,
                    "n_features": FRONT_ORACLE_SPEC.n_features,
                    "n_informative": FRONT_ORACLE_SPEC.n_informative,
                    "noise_level": FRONT_ORACLE_SPEC.noise_level,
                    "seed": FRONT_ORACLE_SPEC.seed,
                }
            },
            "seed": 42,
            "replications": 2,
            "test_fraction": 0.2,
            "output_dir": str(tmp_path / f"threads{threads}"),
            "threads": threads,
            "ga": {
                "pop_size": 40, "generations": 20, "elite_count": 10,
                "generational_gap": 10, "sub_pop_size": 10, "sub_generations": 5,
                "n_subordinate": 2, "sub_every": 5,
            },
        }
        run_experiment(parse_config(raw))
        base = tmp_path / f"threads{threads}"
        outputs[threads] = {
            "summary": (base / "summary.json").read_bytes(),
            "front0": (base / "rep_000" / "front.csv").read_bytes(),
            "front1": (base / "rep_001" / "front.csv").read_bytes(),
        }
    assert outputs[1] == outputs[3]

    summary = json.loads(outputs[1]["summary"])
    assert summary["runs"] == 2
    ok(10, "front.csv and summary.json byte-identical across thread counts")
