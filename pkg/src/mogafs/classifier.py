"""Wrapper classifier: depth-limited decision tree plus the UAR metric.

The tree is grown greedily on Gini impurity with deterministic tie rules
(lowest feature index, then lowest threshold; leaf ties resolve to the lowest
class index), so training is bit-reproducible for a given input.  Alternates
can be plugged in through :data:`CLASSIFIERS`; only the decision tree ships.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataLike, as_view

MIN_SAMPLES_SPLIT = 2
_LEAF = -1


@dataclass
class DecisionTree:
    """Array-encoded binary decision tree.

    ``feature[i] == -1`` marks node ``i`` as a leaf predicting
    ``leaf_class[i]``; otherwise samples with
    ``x[feature[i]] <= threshold[i]`` go to ``left[i]``, the rest to
    ``right[i]``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_class: np.ndarray
    n_features: int
    max_depth: int

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depths = np.zeros(self.node_count, dtype=np.int32)
        for i in range(self.node_count):
            if self.feature[i] != _LEAF:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
        return int(depths.max(initial=0))


def _majority_class(y: np.ndarray, n_classes: int) -> int:
    # argmax returns the first maximum: ties go to the lowest class index.
    return int(np.bincount(y, minlength=n_classes).argmax())


def _best_split(X: np.ndarray, y: np.ndarray, n_classes: int) -> tuple[int, float] | None:
    """Best (feature, threshold) by Gini gain over midpoint candidates.

    Returns None when no feature has two distinct values.  Zero-gain splits
    are allowed; any split strictly shrinks both children, so growth still
    terminates.
    """
    n, n_feat = X.shape
    order = np.argsort(X, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(X, order, axis=0)
    sorted_labels = y[order]

    # Cumulative class counts after each prefix, per feature: (n, n_feat, C).
    cum = np.cumsum(sorted_labels[:, :, None] == np.arange(n_classes), axis=0)
    left_counts = cum[:-1]
    total = cum[-1]
    right_counts = total[None, :, :] - left_counts

    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    gini_left = 1.0 - np.sum((left_counts / n_left[:, :, None]) ** 2, axis=2)
    gini_right = 1.0 - np.sum((right_counts / n_right[:, :, None]) ** 2, axis=2)
    weighted = (n_left * gini_left + n_right * gini_right) / n

    # Candidate cuts only between distinct consecutive values.
    valid = sorted_vals[:-1] != sorted_vals[1:]
    weighted = np.where(valid, weighted, np.inf)

    best_pos = weighted.argmin(axis=0)            # first minimum: lowest threshold
    best_per_feature = weighted[best_pos, np.arange(n_feat)]
    feat = int(best_per_feature.argmin())         # first minimum: lowest feature
    if not np.isfinite(best_per_feature[feat]):
        return None
    pos = int(best_pos[feat])
    thr = 0.5 * (sorted_vals[pos, feat] + sorted_vals[pos + 1, feat])
    return feat, float(thr)


def train(view: DataLike, max_depth: int = 100, seed: int = 0) -> DecisionTree:
    """Grow a tree on the view's samples.

    Growth stops at ``max_depth``, pure nodes, or nodes smaller than
    ``MIN_SAMPLES_SPLIT``.  The greedy builder uses no randomness; ``seed``
    exists so stochastic classifiers can share the interface.

    Raises:
        ValueError: empty view.
    """
    del seed
    v = as_view(view)
    X, y = v.X, v.y
    if X.shape[0] == 0:
        raise ValueError("cannot train on an empty view")
    n_classes = v.class_count

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_class: list[int] = []

    def new_node() -> int:
        feature.append(_LEAF)
        threshold.append(0.0)
        left.append(_LEAF)
        right.append(_LEAF)
        leaf_class.append(0)
        return len(feature) - 1

    # Iterative depth-first growth; stack order does not affect the result.
    root = new_node()
    stack: list[tuple[int, np.ndarray, int]] = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, rows, depth = stack.pop()
        y_node = y[rows]
        first = y_node[0]
        pure = bool((y_node == first).all())
        if depth >= max_depth or len(rows) < MIN_SAMPLES_SPLIT or pure:
            leaf_class[node] = int(first) if pure else _majority_class(y_node, n_classes)
            continue
        split = _best_split(X[rows], y_node, n_classes)
        if split is None:
            leaf_class[node] = _majority_class(y_node, n_classes)
            continue
        feat, thr = split
        goes_left = X[rows, feat] <= thr
        feature[node] = feat
        threshold[node] = thr
        left[node] = new_node()
        right[node] = new_node()
        stack.append((left[node], rows[goes_left], depth + 1))
        stack.append((right[node], rows[~goes_left], depth + 1))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        leaf_class=np.array(leaf_class, dtype=np.int32),
        n_features=X.shape[1],
        max_depth=max_depth,
    )


def predict(tree: DecisionTree, view: DataLike) -> np.ndarray:
    """Predict one class index per row of the view.

    Raises:
        ValueError: column count differs from the training feature space.
    """
    v = as_view(view)
    X = v.X
    if X.shape[1] != tree.n_features:
        raise ValueError(
            f"view has {X.shape[1]} columns, tree was trained on {tree.n_features}"
        )
    node = np.zeros(X.shape[0], dtype=np.int32)
    active = tree.feature[node] != _LEAF
    while active.any():
        idx = np.flatnonzero(active)
        cur = node[idx]
        feats = tree.feature[cur]
        goes_left = X[idx, feats] <= tree.threshold[cur]
        node[idx] = np.where(goes_left, tree.left[cur], tree.right[cur])
        active[idx] = tree.feature[node[idx]] != _LEAF
    return tree.leaf_class[node].astype(np.int64)


@dataclass(frozen=True)
class ConfusionTally:
    """Per-class true-positive and false-negative counts.

    ``tp[i] + fn[i]`` equals the number of samples of class ``i`` in the
    scored labels.
    """

    tp: np.ndarray
    fn: np.ndarray

    @property
    def recalls(self) -> np.ndarray:
        """Per-class recall; NaN for classes with no samples."""
        support = self.tp + self.fn
        with np.errstate(invalid="ignore"):
            return np.where(support > 0, self.tp / support, np.nan)


def confusion_tally(predictions: np.ndarray, truth: np.ndarray, class_count: int) -> ConfusionTally:
    """Tally correct and missed predictions per class.

    Raises:
        ValueError: empty or mismatched inputs, or labels out of range.
    """
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if len(predictions) != len(truth):
        raise ValueError(f"length mismatch: {len(predictions)} vs {len(truth)}")
    if len(truth) == 0:
        raise ValueError("cannot score empty label vectors")
    if truth.min() < 0 or truth.max() >= class_count:
        raise ValueError("truth labels out of range")
    if predictions.min() < 0 or predictions.max() >= class_count:
        raise ValueError("predicted labels out of range")
    support = np.bincount(truth, minlength=class_count)
    tp = np.bincount(truth[predictions == truth], minlength=class_count)
    return ConfusionTally(tp=tp, fn=support - tp)


def uar(predictions: np.ndarray, truth: np.ndarray, class_count: int) -> float:
    """Unweighted average recall (balanced accuracy).

    Mean of per-class recalls; classes absent from ``truth`` are excluded
    from the average, keeping the metric total.

    Raises:
        ValueError: empty or mismatched inputs, or labels out of range.
    """
    tally = confusion_tally(predictions, truth, class_count)
    recalls = tally.recalls
    return float(recalls[~np.isnan(recalls)].mean())


# Registry for pluggable wrapper classifiers: name -> (train, predict).
CLASSIFIERS = {
    "decision_tree": (train, predict),
}
