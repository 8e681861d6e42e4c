"""Experiment orchestration: configs, replications, comparisons, sweeps.

An *experiment* is one hyperparameter configuration executed as several
independent *replications* (same settings, different derived seeds).  A
held-out test partition is carved out once per experiment, before any
optimization, so search never sees test rows.  Artifacts are written per
replication with atomic renames, so interrupting an experiment leaves the
completed replications intact.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import os
import time
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from . import evolution
from .baselines import SyntheticSpec, generate_synthetic, mi_rank, optimal_size_sweep, sfs_greedy
from .data import Dataset, DatasetView, SplitSpec, load_csv, stratified_split
from .evolution import GAConfig, ReplacementStrategy, RunResult
from .frontier import (
    ParetoFront,
    ReplicationSummary,
    attach_test_uar,
    export_front,
    representative_r1hat,
    summarize_replications,
    test_uar_of,
)
from .objectives import ObjectiveConfig
from .pareto import SharingConfig, SharingSpace
from .seeding import derive_seed

log = logging.getLogger(__name__)

TRACE_COLUMNS = [
    "generation",
    "best_uar",
    "median_uar",
    "best_n_selected",
    "front_size",
    "evals_cumulative",
    "subordinate_generations_cumulative",
]

GRID_KEYS = {
    "lambda": ("objectives", "lam"),
    "gamma": ("objectives", "gamma"),
    "n_tests": ("objectives", "n_tests"),
    "use_objective3": ("objectives", "use_objective3"),
    "sigma": ("sharing", "sigma"),
    "alpha": ("sharing", "alpha"),
    "replacement_strategy": ("ga", "replacement_strategy"),
    "n_subordinate": ("ga", "n_subordinate"),
}


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""


@dataclass(frozen=True)
class DatasetSource:
    """Either a CSV path or a synthetic spec (exactly one is set)."""

    csv_path: str | None = None
    label_column: str | int | None = None
    synthetic: SyntheticSpec | None = None

    def load(self) -> Dataset:
        if self.csv_path is not None:
            return load_csv(self.csv_path, self.label_column)
        dataset, _ = generate_synthetic(self.synthetic)
        return dataset


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSource
    ga: GAConfig = GAConfig()
    objectives: ObjectiveConfig = ObjectiveConfig()
    sharing: SharingConfig = SharingConfig()
    test_fraction: float = 0.2
    replications: int = 5
    seed: int = 0
    output_dir: str = "mogafs-out"
    threads: int = 1
    compare_max_subset_size: int = 15
    mi_bins: int = 10
    grid: dict[str, list] = field(default_factory=dict)


def _reject_unknown(section: dict, allowed: set[str], prefix: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key '{prefix}{key}'")


def _check(condition: bool, key: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"invalid value for '{key}': {message}")


def _build_dataset(raw: Any) -> DatasetSource:
    if not isinstance(raw, dict):
        raise ConfigError("invalid value for 'dataset': expected an object")
    _reject_unknown(raw, {"csv", "label_column", "synthetic"}, "dataset.")
    if ("csv" in raw) == ("synthetic" in raw):
        raise ConfigError("'dataset' must contain exactly one of 'csv' or 'synthetic'")
    if "csv" in raw:
        return DatasetSource(csv_path=raw["csv"], label_column=raw.get("label_column"))
    syn = raw["synthetic"]
    if not isinstance(syn, dict):
        raise ConfigError("invalid value for 'dataset.synthetic': expected an object")
    allowed = {"n_samples", "n_features", "n_informative", "n_classes", "noise_level", "seed"}
    _reject_unknown(syn, allowed, "dataset.synthetic.")
    try:
        return DatasetSource(synthetic=SyntheticSpec(**syn))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value in 'dataset.synthetic': {exc}") from exc


def _build_section(raw: Any, cls, prefix: str, transforms: dict | None = None):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"invalid value for '{prefix.rstrip('.')}': expected an object")
    allowed = set(cls.__dataclass_fields__)
    _reject_unknown(raw, allowed, prefix)
    values = dict(raw)
    for key, fn in (transforms or {}).items():
        if key in values:
            try:
                values[key] = fn(values[key])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"invalid value for '{prefix}{key}': {exc}") from exc
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value in '{prefix.rstrip('.')}' section: {exc}") from exc


def _as_tiers(raw) -> tuple[tuple[float, float], ...]:
    return tuple((float(f), float(a)) for f, a in raw)


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a parsed JSON document and build the experiment config."""
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be an object")
    top_allowed = {
        "dataset", "ga", "objectives", "sharing", "test_fraction", "replications",
        "seed", "output_dir", "threads", "compare", "grid",
    }
    _reject_unknown(raw, top_allowed, "")
    if "dataset" not in raw:
        raise ConfigError("missing required key 'dataset'")

    dataset = _build_dataset(raw["dataset"])
    ga = _build_section(
        raw.get("ga"), GAConfig, "ga.",
        transforms={
            "replacement_strategy": ReplacementStrategy,
            "staggered_tiers": _as_tiers,
        },
    )
    objectives = _build_section(raw.get("objectives"), ObjectiveConfig, "objectives.")
    sharing = _build_section(
        raw.get("sharing"), SharingConfig, "sharing.", transforms={"space": SharingSpace}
    )

    test_fraction = raw.get("test_fraction", 0.2)
    _check(
        isinstance(test_fraction, (int, float)) and 0 < test_fraction < 1,
        "test_fraction", "must be a number in (0, 1)",
    )
    replications = raw.get("replications", 5)
    _check(
        isinstance(replications, int) and replications >= 1,
        "replications", "must be an integer >= 1",
    )
    seed = raw.get("seed", 0)
    _check(isinstance(seed, int), "seed", "must be an integer")
    threads = raw.get("threads", 1)
    _check(isinstance(threads, int) and threads >= 1, "threads", "must be an integer >= 1")
    output_dir = raw.get("output_dir", "mogafs-out")
    _check(isinstance(output_dir, str) and output_dir != "", "output_dir", "must be a path")

    compare = raw.get("compare") or {}
    _reject_unknown(compare, {"max_subset_size", "mi_bins"}, "compare.")
    max_subset = compare.get("max_subset_size", 15)
    _check(
        isinstance(max_subset, int) and max_subset >= 1,
        "compare.max_subset_size", "must be an integer >= 1",
    )
    mi_bins = compare.get("mi_bins", 10)
    _check(isinstance(mi_bins, int) and mi_bins >= 2, "compare.mi_bins", "must be an integer >= 2")

    grid = raw.get("grid") or {}
    if not isinstance(grid, dict):
        raise ConfigError("invalid value for 'grid': expected an object")
    for key, values in grid.items():
        if key not in GRID_KEYS:
            raise ConfigError(
                f"unknown key 'grid.{key}' (expected one of {sorted(GRID_KEYS)})"
            )
        if not isinstance(values, list) or not values:
            raise ConfigError(f"invalid value for 'grid.{key}': expected a non-empty list")

    return ExperimentConfig(
        dataset=dataset,
        ga=ga,
        objectives=objectives,
        sharing=sharing,
        test_fraction=float(test_fraction),
        replications=replications,
        seed=seed,
        output_dir=output_dir,
        threads=threads,
        compare_max_subset_size=max_subset,
        mi_bins=mi_bins,
        grid={k: list(v) for k, v in grid.items()},
    )


def load_config(path: str, overrides: dict | None = None) -> ExperimentConfig:
    """Read and validate a JSON config file; CLI overrides applied on top."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file '{path}': {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file '{path}' is not valid JSON: {exc}") from exc
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(raw)


def _atomic_write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_trace_csv(result: RunResult, path: str) -> None:
    lines = [",".join(TRACE_COLUMNS)]
    for rec in result.trace.records:
        lines.append(
            ",".join(
                [
                    str(rec.generation),
                    repr(rec.best_uar),
                    repr(rec.median_uar),
                    str(rec.best_n_selected),
                    str(rec.front_size),
                    str(rec.evals_cumulative),
                    str(rec.subordinate_generations_cumulative),
                ]
            )
        )
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_summary_json(summary: ReplicationSummary, path: str) -> None:
    _atomic_write_text(path, json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n")


def carve_test_split(dataset: Dataset, cfg: ExperimentConfig) -> tuple[DatasetView, DatasetView]:
    """Split (pool, test) once per experiment, stratified at a derived seed."""
    spec = SplitSpec(
        validation_fraction=cfg.test_fraction,
        seed=derive_seed(cfg.seed, "test-split"),
    )
    return stratified_split(dataset, spec)


def replication_seed(cfg: ExperimentConfig, index: int) -> int:
    return derive_seed(cfg.seed, "replication", index)


def run_replication(
    cfg: ExperimentConfig, pool: DatasetView, index: int
) -> tuple[RunResult, ParetoFront]:
    """One independent run; returns the result and its archive front."""
    seed = replication_seed(cfg, index)
    ga = replace(cfg.ga, seed=seed)
    objectives = replace(cfg.objectives, base_seed=seed)
    result = evolution.run(
        pool, ga, objectives, cfg.sharing, threads=cfg.threads, run_id=f"rep{index:03d}"
    )
    return result, result.archive_front


@dataclass
class ExperimentResult:
    fronts: list[ParetoFront]
    summary: ReplicationSummary
    output_dir: str


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Execute all replications; write per-replication artifacts and a summary."""
    dataset = cfg.dataset.load()
    pool, test = carve_test_split(dataset, cfg)
    if write:
        os.makedirs(cfg.output_dir, exist_ok=True)

    fronts: list[ParetoFront] = []
    for r in range(cfg.replications):
        started = time.perf_counter()
        result, front = run_replication(cfg, pool, r)
        objectives = replace(cfg.objectives, base_seed=replication_seed(cfg, r))
        front = attach_test_uar(front, pool, test, objectives)
        pop_front = attach_test_uar(result.population_front, pool, test, objectives)
        fronts.append(front)
        if write:
            rep_dir = os.path.join(cfg.output_dir, f"rep_{r:03d}")
            os.makedirs(rep_dir, exist_ok=True)
            export_front(front, os.path.join(rep_dir, "front.csv"), "csv")
            export_front(front, os.path.join(rep_dir, "front.json"), "json")
            export_front(pop_front, os.path.join(rep_dir, "front_population.csv"), "csv")
            write_trace_csv(result, os.path.join(rep_dir, "trace.csv"))
        log.info(
            "replication %d/%d: front=%d members, %.1fs",
            r + 1, cfg.replications, len(front), time.perf_counter() - started,
        )

    summary = summarize_replications(fronts)
    if write:
        write_summary_json(summary, os.path.join(cfg.output_dir, "summary.json"))
    return ExperimentResult(fronts=fronts, summary=summary, output_dir=cfg.output_dir)


COMPARE_COLUMNS = ["method", "replication", "uar_test", "n_selected", "wall_seconds"]


def _prefix_mask(n_features: int, subset) -> np.ndarray:
    mask = np.zeros(n_features, dtype=bool)
    mask[list(subset)] = True
    return mask


def compare_methods(cfg: ExperimentConfig, write: bool = True) -> dict:
    """Run the GA engine, MI ranking, and greedy SFS on identical data.

    Baselines pick their subset size on the optimization pool (smallest size
    attaining the maximum wrapper UAR); every method reports held-out test
    UAR of its chosen subset.  Rows are per (method, replication); the
    returned report carries per-method medians.
    """
    dataset = cfg.dataset.load()
    pool, test = carve_test_split(dataset, cfg)
    max_k = min(cfg.compare_max_subset_size, dataset.n_features)
    rows: list[dict] = []

    for r in range(cfg.replications):
        seed = replication_seed(cfg, r)
        objectives = replace(cfg.objectives, base_seed=seed)

        started = time.perf_counter()
        result, front = run_replication(cfg, pool, r)
        front = attach_test_uar(front, pool, test, objectives)
        member, _ = representative_r1hat(front)
        rows.append({
            "method": "mogafs",
            "replication": r,
            "uar_test": member.uar_test,
            "n_selected": member.n_selected,
            "wall_seconds": time.perf_counter() - started,
        })

        started = time.perf_counter()
        ranking = mi_rank(pool, cfg.mi_bins)
        best_k, _ = optimal_size_sweep(ranking[:max_k], pool, objectives)
        mask = _prefix_mask(dataset.n_features, ranking[:best_k])
        rows.append({
            "method": "mi_ranking",
            "replication": r,
            "uar_test": test_uar_of(mask, pool, test, objectives),
            "n_selected": best_k,
            "wall_seconds": time.perf_counter() - started,
        })

        started = time.perf_counter()
        steps = sfs_greedy(pool, max_k, objectives)
        best_k, _ = optimal_size_sweep(
            [s.subset for s in steps], pool, objectives, scores=[s.score for s in steps]
        )
        mask = _prefix_mask(dataset.n_features, steps[best_k - 1].subset)
        rows.append({
            "method": "sfs",
            "replication": r,
            "uar_test": test_uar_of(mask, pool, test, objectives),
            "n_selected": best_k,
            "wall_seconds": time.perf_counter() - started,
        })
        log.info("comparison replication %d/%d done", r + 1, cfg.replications)

    report = {"rows": rows, "methods": {}}
    for method in ("mogafs", "mi_ranking", "sfs"):
        method_rows = [row for row in rows if row["method"] == method]
        report["methods"][method] = {
            "median_uar_test": float(np.median([row["uar_test"] for row in method_rows])),
            "median_n_selected": float(np.median([row["n_selected"] for row in method_rows])),
            "median_wall_seconds": float(np.median([row["wall_seconds"] for row in method_rows])),
        }

    if write:
        os.makedirs(cfg.output_dir, exist_ok=True)
        lines = [",".join(COMPARE_COLUMNS)]
        for row in rows:
            lines.append(",".join(str(row[c]) for c in COMPARE_COLUMNS))
        _atomic_write_text(
            os.path.join(cfg.output_dir, "compare.csv"), "\n".join(lines) + "\n"
        )
        _atomic_write_text(
            os.path.join(cfg.output_dir, "compare.json"),
            json.dumps(report, indent=2, sort_keys=True) + "\n",
        )
    return report


def _apply_grid_cell(cfg: ExperimentConfig, assignment: dict) -> ExperimentConfig:
    sections = {"ga": cfg.ga, "objectives": cfg.objectives, "sharing": cfg.sharing}
    for key, value in assignment.items():
        section, attr = GRID_KEYS[key]
        if key == "replacement_strategy":
            value = ReplacementStrategy(value)
        sections[section] = replace(sections[section], **{attr: value})
    return replace(
        cfg, ga=sections["ga"], objectives=sections["objectives"], sharing=sections["sharing"]
    )


def _cell_name(assignment: dict) -> str:
    return "_".join(f"{k}={v}" for k, v in assignment.items())


def sweep_grid(cfg: ExperimentConfig, write: bool = True) -> list[dict]:
    """Run the Cartesian product of the config's parameter grid.

    Each cell is a full experiment (all replications); the returned table
    holds one row per cell with the summary statistics.
    """
    if not cfg.grid:
        raise ConfigError("'grid' section is empty; nothing to sweep")
    keys = list(cfg.grid)
    cells = []
    for combo in itertools.product(*(cfg.grid[k] for k in keys)):
        assignment = dict(zip(keys, combo))
        cell_cfg = _apply_grid_cell(cfg, assignment)
        cell_cfg = replace(
            cell_cfg,
            output_dir=os.path.join(cfg.output_dir, "cells", _cell_name(assignment)),
        )
        result = run_experiment(cell_cfg, write=write)
        row = dict(assignment)
        row.update(result.summary.to_dict())
        cells.append(row)
        log.info("sweep cell %s done", _cell_name(assignment))

    if write:
        os.makedirs(cfg.output_dir, exist_ok=True)
        columns = keys + ["median_r1hat", "std_r1hat", "median_uar", "median_n_selected", "runs"]
        lines = [",".join(columns)]
        for row in cells:
            lines.append(",".join(str(row[c]) for c in columns))
        _atomic_write_text(os.path.join(cfg.output_dir, "sweep.csv"), "\n".join(lines) + "\n")
        _atomic_write_text(
            os.path.join(cfg.output_dir, "sweep.json"),
            json.dumps(cells, indent=2, sort_keys=True) + "\n",
        )
    return cells
