"""Dataset loading, views, and stratified splitting.

A :class:`Dataset` owns its arrays and is immutable after load.  Row/column
selections (:class:`DatasetView`) reference the parent's storage and
materialize the selected block lazily, so views are cheap to create and safe
to share across concurrent evaluators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

MISSING_TOKENS = ("", "?")


@dataclass(frozen=True)
class Dataset:
    """In-memory dataset: real-valued feature matrix plus dense class labels.

    Attributes:
        X: (n_samples, n_features) float64 matrix.
        y: (n_samples,) int64 class indices in ``[0, class_count)``.
        label_names: original label of each class index, in first-appearance
            order from the source file.
        dropped_rows: rows discarded at ingestion because of missing values.
    """

    X: np.ndarray
    y: np.ndarray
    label_names: tuple[str, ...]
    dropped_rows: int = 0

    def __post_init__(self) -> None:
        self.X.setflags(write=False)
        self.y.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def class_count(self) -> int:
        return len(self.label_names)

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.class_count)

    def view(self) -> "DatasetView":
        """Full view of this dataset."""
        return DatasetView(
            self,
            rows=np.arange(self.n_samples),
            cols=np.arange(self.n_features),
        )


@dataclass
class DatasetView:
    """Read-only row/column selection backed by a parent :class:`Dataset`."""

    parent: Dataset
    rows: np.ndarray
    cols: np.ndarray
    _X_cache: np.ndarray | None = field(default=None, repr=False)
    _y_cache: np.ndarray | None = field(default=None, repr=False)

    @property
    def X(self) -> np.ndarray:
        if self._X_cache is None:
            block = self.parent.X[np.ix_(self.rows, self.cols)]
            block.setflags(write=False)
            self._X_cache = block
        return self._X_cache

    @property
    def y(self) -> np.ndarray:
        if self._y_cache is None:
            labels = self.parent.y[self.rows]
            labels.setflags(write=False)
            self._y_cache = labels
        return self._y_cache

    @property
    def n_samples(self) -> int:
        return len(self.rows)

    @property
    def n_features(self) -> int:
        return len(self.cols)

    @property
    def class_count(self) -> int:
        # Views keep the parent's label space even if a class is absent.
        return self.parent.class_count

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.class_count)

    @property
    def label_names(self) -> tuple[str, ...]:
        return self.parent.label_names


DataLike = Dataset | DatasetView


def as_view(d: DataLike) -> DatasetView:
    return d.view() if isinstance(d, Dataset) else d


@dataclass(frozen=True)
class SplitSpec:
    """Parameters of a stratified train/validation split."""

    validation_fraction: float = 0.30
    seed: int = 0
    stratified: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError(
                f"validation_fraction must be in (0, 1), got {self.validation_fraction}"
            )


def load_csv(path: str, label_column: str | int | None = None) -> Dataset:
    """Load a dataset from a headered CSV file.

    Empty cells and ``?`` are treated as missing; rows containing any missing
    value are dropped and counted in ``Dataset.dropped_rows``.  Labels are
    remapped to dense indices in first-appearance order (original values kept
    in ``label_names``).

    Args:
        path: CSV file path (UTF-8, header row required).
        label_column: column name or integer position of the label column;
            defaults to the last column.

    Raises:
        ValueError: no usable rows, a single class, a class with fewer than
            two samples, or a non-numeric feature cell.
        OSError: unreadable file.
    """
    frame = pd.read_csv(
        path,
        header=0,
        dtype=str,
        keep_default_na=False,
        na_values=list(MISSING_TOKENS),
        skipinitialspace=True,
        encoding="utf-8",
    )
    if frame.shape[1] < 2:
        raise ValueError(f"{path}: need at least one feature column and a label column")

    if label_column is None:
        label_idx = frame.shape[1] - 1
    elif isinstance(label_column, int):
        label_idx = label_column if label_column >= 0 else frame.shape[1] + label_column
        if not 0 <= label_idx < frame.shape[1]:
            raise ValueError(f"label column index {label_column} out of range")
    else:
        matches = np.flatnonzero(frame.columns == label_column)
        if len(matches) == 0:
            raise ValueError(f"label column {label_column!r} not found in header")
        label_idx = int(matches[0])

    feature_cols = [c for i, c in enumerate(frame.columns) if i != label_idx]
    labels_raw = frame.iloc[:, label_idx]

    usable = labels_raw.notna()
    features = frame[feature_cols]
    usable &= features.notna().all(axis=1)
    dropped = int((~usable).sum())

    frame = frame.loc[usable]
    if frame.shape[0] == 0:
        raise ValueError(f"{path}: no usable rows after dropping missing values")

    try:
        X = frame[feature_cols].astype(np.float64).to_numpy()
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric feature value: {exc}") from exc

    labels_raw = frame.iloc[:, label_idx].to_numpy()
    label_names: list[str] = []
    index_of: dict[str, int] = {}
    y = np.empty(len(labels_raw), dtype=np.int64)
    for i, raw in enumerate(labels_raw):
        key = str(raw)
        if key not in index_of:
            index_of[key] = len(label_names)
            label_names.append(key)
        y[i] = index_of[key]

    if len(label_names) < 2:
        raise ValueError(f"{path}: label column has a single class {label_names!r}")
    counts = np.bincount(y)
    if counts.min() < 2:
        small = label_names[int(counts.argmin())]
        raise ValueError(f"{path}: class {small!r} has {counts.min()} sample(s); need >= 2")

    return Dataset(X=X, y=y, label_names=tuple(label_names), dropped_rows=dropped)


def stratified_split(d: DataLike, spec: SplitSpec) -> tuple[DatasetView, DatasetView]:
    """Split into (train, validation) views, stratified per class.

    Per-class validation count is ``round(fraction * class_count)`` clamped to
    ``[1, class_count - 1]``, so every class appears on both sides.  The split
    is a pure function of ``spec.seed``.

    Raises:
        ValueError: a class present in ``d`` has fewer than two samples.
    """
    view = as_view(d)
    y = view.y
    rng = np.random.default_rng(spec.seed)

    train_parts: list[np.ndarray] = []
    val_parts: list[np.ndarray] = []
    for cls in range(view.class_count):
        members = np.flatnonzero(y == cls)
        if len(members) == 0:
            continue
        if len(members) < 2:
            raise ValueError(
                f"class {cls} has {len(members)} sample(s); cannot place it in both partitions"
            )
        n_val = int(round(spec.validation_fraction * len(members)))
        n_val = min(max(n_val, 1), len(members) - 1)
        order = rng.permutation(len(members)) if spec.stratified else np.arange(len(members))
        shuffled = members[order]
        val_parts.append(shuffled[:n_val])
        train_parts.append(shuffled[n_val:])

    train_rows = np.sort(np.concatenate(train_parts))
    val_rows = np.sort(np.concatenate(val_parts))
    return (
        DatasetView(view.parent, rows=view.rows[train_rows], cols=view.cols),
        DatasetView(view.parent, rows=view.rows[val_rows], cols=view.cols),
    )


def project(d: DataLike, mask: np.ndarray) -> DatasetView:
    """Column view exposing only features where ``mask`` is set.

    Raises:
        ValueError: mask length mismatch or all-zero mask.
    """
    view = as_view(d)
    mask = np.asarray(mask, dtype=bool)
    if len(mask) != view.n_features:
        raise ValueError(f"mask length {len(mask)} != feature count {view.n_features}")
    if not mask.any():
        raise ValueError("mask selects no features")
    return DatasetView(view.parent, rows=view.rows, cols=view.cols[mask])
