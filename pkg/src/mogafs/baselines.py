"""Desk-scale competitor selectors and a planted-feature data generator.

The synthetic generator plants class-conditional Gaussian signal in a known
subset of features, which gives every experiment an exact ground truth.  The
two baselines are a univariate mutual-information ranking (plug-in estimator
over equal-frequency bins) and greedy sequential forward selection driven by
the same wrapper evaluation as the genetic engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataLike, Dataset, as_view
from .objectives import ObjectiveConfig, objective1_uar


@dataclass(frozen=True)
class SyntheticSpec:
    """Planted-feature dataset description.

    Informative features are class-conditional Gaussians with means one unit
    apart and standard deviation ``noise_level``; the rest are standard
    Gaussians independent of the class.  ``noise_level <= 0.5`` keeps the
    class-conditional means at least two standard deviations apart.
    """

    n_samples: int = 200
    n_features: int = 20
    n_informative: int = 3
    n_classes: int = 2
    noise_level: float = 0.25
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_informative > self.n_features:
            raise ValueError(
                f"n_informative {self.n_informative} exceeds n_features {self.n_features}"
            )
        if self.n_informative < 0:
            raise ValueError(f"n_informative must be >= 0, got {self.n_informative}")
        if self.n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {self.n_classes}")
        if not 0.0 < self.noise_level <= 0.5:
            raise ValueError(
                f"noise_level must be in (0, 0.5] to keep class means separated, "
                f"got {self.noise_level}"
            )
        if self.n_samples < 2 * self.n_classes:
            raise ValueError("need at least two samples per class")


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, np.ndarray]:
    """Build the planted dataset; returns (dataset, informative indices)."""
    rng = np.random.default_rng(spec.seed)
    y = np.arange(spec.n_samples) % spec.n_classes
    informative = np.sort(rng.permutation(spec.n_features)[: spec.n_informative])

    X = rng.standard_normal((spec.n_samples, spec.n_features))
    for j in informative:
        X[:, j] = y + spec.noise_level * rng.standard_normal(spec.n_samples)

    labels = tuple(f"c{i}" for i in range(spec.n_classes))
    return Dataset(X=X, y=y.astype(np.int64), label_names=labels), informative


def _equal_frequency_bins(column: np.ndarray, bins: int) -> np.ndarray:
    """Bin index per value using interior quantile edges.

    Membership depends only on the ordering of values, so any strictly
    monotone transform of the column leaves the binning unchanged.
    """
    edges = np.quantile(column, np.linspace(0, 1, bins + 1)[1:-1])
    return np.searchsorted(edges, column, side="right")


def mutual_information(x: np.ndarray, y: np.ndarray, bins: int) -> float:
    """Plug-in MI estimate (nats) between a discretized feature and labels."""
    if len(np.unique(x)) < 2:
        return 0.0
    bx = _equal_frequency_bins(x, bins)
    joint = np.zeros((bins, int(y.max()) + 1))
    np.add.at(joint, (bx, y), 1.0)
    joint /= joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log(joint[nz] / (px @ py)[nz])))


def mi_rank(d: DataLike, bins: int = 10) -> np.ndarray:
    """Feature indices in descending mutual-information order (ties by index).

    Raises:
        ValueError: fewer than two bins.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    view = as_view(d)
    X, y = view.X, view.y
    scores = np.array([mutual_information(X[:, j], y, bins) for j in range(view.n_features)])
    # argsort is stable, so equal scores keep ascending feature order.
    return np.argsort(-scores, kind="stable")


@dataclass(frozen=True)
class SelectionStep:
    """One greedy step: the subset after adding the k-th feature."""

    size: int
    added: int
    subset: tuple[int, ...]
    score: float


def sfs_greedy(d: DataLike, max_k: int, cfg: ObjectiveConfig) -> list[SelectionStep]:
    """Sequential forward selection up to ``max_k`` features.

    At each step the feature maximizing the wrapper UAR of the augmented
    subset is added (ties by lowest index); every intermediate subset and
    score is recorded.
    """
    view = as_view(d)
    if max_k > view.n_features:
        raise ValueError(f"max_k {max_k} exceeds feature count {view.n_features}")
    selected: list[int] = []
    mask = np.zeros(view.n_features, dtype=bool)
    steps: list[SelectionStep] = []
    for k in range(1, max_k + 1):
        best_j, best_score = -1, -np.inf
        for j in range(view.n_features):
            if mask[j]:
                continue
            mask[j] = True
            score = objective1_uar(mask, view, cfg)
            mask[j] = False
            if score > best_score:
                best_j, best_score = j, score
        mask[best_j] = True
        selected.append(best_j)
        steps.append(
            SelectionStep(size=k, added=best_j, subset=tuple(selected), score=best_score)
        )
    return steps


def optimal_size_sweep(
    prefixes: list[tuple[int, ...]] | np.ndarray,
    d: DataLike,
    cfg: ObjectiveConfig,
    scores: list[float] | None = None,
) -> tuple[int, float]:
    """Smallest prefix size attaining the maximum wrapper UAR.

    ``prefixes`` is either a feature ranking (evaluated incrementally, one
    feature at a time) or an explicit list of nested subsets; precomputed
    ``scores`` (e.g. from :func:`sfs_greedy`) skip re-evaluation.
    """
    view = as_view(d)
    if isinstance(prefixes, np.ndarray):
        subsets = [tuple(prefixes[:k]) for k in range(1, len(prefixes) + 1)]
    else:
        subsets = [tuple(s) for s in prefixes]
    if not subsets:
        raise ValueError("nothing to sweep")

    if scores is None:
        scores = []
        for subset in subsets:
            mask = np.zeros(view.n_features, dtype=bool)
            mask[list(subset)] = True
            scores.append(objective1_uar(mask, view, cfg))

    best_idx = int(np.argmax(scores))  # first maximum: smallest size
    return len(subsets[best_idx]), float(scores[best_idx])
