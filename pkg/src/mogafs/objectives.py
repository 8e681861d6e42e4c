"""Objective functions evaluated per chromosome.

Objective I repeats a stratified train/validation split ``n_tests`` times and
averages the decision-tree UAR on the selected features.  Objective II maps
the fraction of *unselected* features through a sigmoid so that differences
between small subsets matter more than differences between large ones.
Objective III scores geometric class separability via nearest same-class and
nearest other-class neighbours under the L1 metric.

Every random draw is seeded from ``(base_seed, chromosome bits)``, so a
chromosome's objective vector is a pure function of its bit pattern: results
cannot depend on evaluation order, thread count, or the generation in which a
chromosome appears, and repeated evaluations are cacheable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import classifier
from .data import DataLike, SplitSpec, as_view, project, stratified_split
from .seeding import chromosome_key, derive_seed


@dataclass(frozen=True)
class ObjectiveConfig:
    """Parameters of the per-chromosome evaluation.

    Attributes:
        n_tests: train/validation splits averaged into Objective I.
        validation_fraction: held-out share of each split.
        lam: sigmoid steepness for Objective II; ``None`` uses the raw
            cardinality ratio instead.
        gamma: sigmoid offset (centres the transition at ``CR = -gamma``).
        n_neighbor_samples: instances drawn for Objective III; capped at the
            training-partition size.
        use_objective3: whether the separability score participates in
            dominance comparisons.
        base_seed: root of all evaluation seeds.
        tree_max_depth: depth limit of the wrapper decision tree.
        classifier_name: key into :data:`classifier.CLASSIFIERS`.
    """

    n_tests: int = 3
    validation_fraction: float = 0.30
    lam: float | None = 0.5
    gamma: float = -0.5
    n_neighbor_samples: int = 64
    use_objective3: bool = True
    base_seed: int = 0
    tree_max_depth: int = 100
    classifier_name: str = "decision_tree"

    def __post_init__(self) -> None:
        if self.n_tests < 1:
            raise ValueError(f"n_tests must be >= 1, got {self.n_tests}")
        if self.n_neighbor_samples < 1:
            raise ValueError(f"n_neighbor_samples must be >= 1, got {self.n_neighbor_samples}")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError(
                f"validation_fraction must be in (0, 1), got {self.validation_fraction}"
            )
        if self.lam is not None and self.lam <= 0:
            raise ValueError(f"lam must be positive or None, got {self.lam}")

    @property
    def n_objectives(self) -> int:
        return 3 if self.use_objective3 else 2


@dataclass(frozen=True)
class ObjectiveVector:
    """Objective values of one chromosome (all maximized).

    ``m_dist`` is 0.0 when the separability objective is disabled; the active
    mask decides what enters dominance comparisons.
    """

    uar: float
    cr_mapped: float
    m_dist: float
    n_selected: int

    def values(self, n_objectives: int = 3) -> tuple[float, ...]:
        full = (self.uar, self.cr_mapped, self.m_dist)
        return full[:n_objectives]


def cardinality_ratio(x: np.ndarray) -> float:
    """Fraction of features left out: ``(N_F - N_s) / N_F``."""
    x = np.asarray(x, dtype=bool)
    if len(x) == 0:
        raise ValueError("empty chromosome")
    return float((len(x) - x.sum()) / len(x))


def sigmoid_ratio(cr: float, lam: float, gamma: float) -> float:
    """Non-linear map ``1 / (1 + exp(-lam * (cr + gamma)))``."""
    return float(1.0 / (1.0 + np.exp(-lam * (cr + gamma))))


def objective2_sigmoid(x: np.ndarray, lam: float, gamma: float) -> float:
    """Sigmoid-mapped cardinality ratio of a chromosome."""
    return sigmoid_ratio(cardinality_ratio(x), lam, gamma)


def _split_seed(cfg: ObjectiveConfig, key: bytes, test_index: int) -> int:
    return derive_seed(cfg.base_seed, key, "split", test_index)


def _uar_over_splits(
    x: np.ndarray, d: DataLike, cfg: ObjectiveConfig
) -> tuple[float, DataLike]:
    """Mean validation UAR over the repeated splits, plus the first training
    partition (reused by the separability objective)."""
    train_fn, predict_fn = classifier.CLASSIFIERS[cfg.classifier_name]
    key = chromosome_key(x)
    total = 0.0
    first_train: DataLike | None = None
    for t in range(cfg.n_tests):
        spec = SplitSpec(cfg.validation_fraction, seed=_split_seed(cfg, key, t))
        train_part, val_part = stratified_split(d, spec)
        if t == 0:
            first_train = train_part
        tree = train_fn(project(train_part, x), cfg.tree_max_depth)
        preds = predict_fn(tree, project(val_part, x))
        total += classifier.uar(preds, val_part.y, val_part.class_count)
    return total / cfg.n_tests, first_train


def objective1_uar(x: np.ndarray, d: DataLike, cfg: ObjectiveConfig) -> float:
    """Mean validation UAR over ``cfg.n_tests`` stratified splits."""
    x = np.asarray(x, dtype=bool)
    if not x.any():
        raise ValueError("chromosome selects no features")
    mean_uar, _ = _uar_over_splits(x, d, cfg)
    return mean_uar


def objective3_distance(
    x: np.ndarray, train_view: DataLike, n_samples_drawn: int, seed: int
) -> float:
    """Nearest-hit/nearest-miss separability in the selected feature space.

    Draws ``n_samples_drawn`` instances uniformly with replacement; for each,
    accumulates ``(L1(instance, nearest other-class) - L1(instance, nearest
    same-class, excluding itself)) / N_s`` and returns the mean.  Bounded in
    ``[-1, 1]`` for binary features.

    Raises:
        ValueError: fewer than two classes present, or a present class with a
            single sample (its nearest same-class neighbour would not exist).
    """
    x = np.asarray(x, dtype=bool)
    view = as_view(train_view)
    proj = project(view, x)
    Xp, y = proj.X, proj.y

    counts = np.bincount(y, minlength=view.class_count)
    present = counts > 0
    if present.sum() < 2:
        raise ValueError("separability score needs at least two classes present")
    if counts[present].min() < 2:
        raise ValueError("every present class needs at least two samples")

    n = Xp.shape[0]
    n_s = int(x.sum())
    rng = np.random.default_rng(seed)
    drawn = rng.integers(0, n, size=min(n_samples_drawn, n))

    # Pairwise L1 distances from the drawn instances to all rows.
    dists = np.abs(Xp[drawn, None, :] - Xp[None, :, :]).sum(axis=2)
    same = y[drawn, None] == y[None, :]
    self_mask = np.zeros_like(same)
    self_mask[np.arange(len(drawn)), drawn] = True

    hit = np.where(same & ~self_mask, dists, np.inf).min(axis=1)
    miss = np.where(~same, dists, np.inf).min(axis=1)
    return float(np.mean((miss - hit) / n_s))


def evaluate_chromosome(x: np.ndarray, d: DataLike, cfg: ObjectiveConfig) -> ObjectiveVector:
    """Full objective vector of one chromosome.

    Objective III is computed on the training partition of the first split,
    not per split, to bound cost.
    """
    x = np.asarray(x, dtype=bool)
    if not x.any():
        raise ValueError("chromosome selects no features")
    key = chromosome_key(x)
    uar_mean, first_train = _uar_over_splits(x, d, cfg)

    cr = cardinality_ratio(x)
    cr_mapped = cr if cfg.lam is None else sigmoid_ratio(cr, cfg.lam, cfg.gamma)

    m_dist = 0.0
    if cfg.use_objective3:
        m_dist = objective3_distance(
            x,
            first_train,
            cfg.n_neighbor_samples,
            seed=derive_seed(cfg.base_seed, key, "m_dist"),
        )

    return ObjectiveVector(
        uar=uar_mean, cr_mapped=cr_mapped, m_dist=m_dist, n_selected=int(x.sum())
    )
