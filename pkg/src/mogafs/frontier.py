"""Pareto-front persistence, representative solutions, and run summaries.

Two scalarizations pick a single representative from a front, both measuring
Euclidean distance to the ideal point (1, 1):

* ``r1_score`` pairs the search-phase UAR with the sigmoid-mapped
  cardinality ratio (the value the optimizer actually saw);
* ``r1hat_score`` pairs held-out test UAR with the raw cardinality ratio,
  giving a direct, transformation-free assessment for comparing runs.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import classifier
from .data import DataLike, project
from .objectives import ObjectiveConfig, ObjectiveVector, cardinality_ratio, sigmoid_ratio
from .pareto import dominates

FRONT_COLUMNS = [
    "run_id",
    "generation",
    "n_selected",
    "uar_validation",
    "uar_test",
    "cr",
    "cr_lambda",
    "m_dist",
    "r1hat",
    "bitmask_hex",
    "n_features",
]


@dataclass(frozen=True)
class FrontMember:
    chromosome: np.ndarray
    objectives: ObjectiveVector
    uar_test: float | None = None

    @property
    def n_selected(self) -> int:
        return self.objectives.n_selected

    @property
    def cr(self) -> float:
        return cardinality_ratio(self.chromosome)

    @property
    def bitmask_hex(self) -> str:
        return encode_bitmask(self.chromosome)


@dataclass
class ParetoFront:
    """Non-dominated solutions with run provenance."""

    members: list[FrontMember] = field(default_factory=list)
    run_id: str = ""
    generation: int = 0

    def __len__(self) -> int:
        return len(self.members)


def encode_bitmask(bits: np.ndarray) -> str:
    """Hex string of the chromosome; bit i of the integer = feature i."""
    bits = np.asarray(bits, dtype=bool)
    value = 0
    for i in np.flatnonzero(bits):
        value |= 1 << int(i)
    width = (len(bits) + 3) // 4
    return format(value, f"0{max(width, 1)}x")


def decode_bitmask(hex_mask: str, n_features: int) -> np.ndarray:
    """Inverse of :func:`encode_bitmask`."""
    value = int(hex_mask, 16)
    bits = np.zeros(n_features, dtype=bool)
    for i in range(n_features):
        if value >> i & 1:
            bits[i] = True
    return bits


def r1_score(uar: float, cr_mapped: float) -> float:
    """Distance-to-ideal grade on (UAR, sigmoid-mapped ratio)."""
    return 1.0 - math.sqrt((1.0 - uar) ** 2 + (1.0 - cr_mapped) ** 2)


def r1hat_score(uar: float, cr: float) -> float:
    """Distance-to-ideal grade on (UAR, raw cardinality ratio)."""
    return 1.0 - math.sqrt((1.0 - uar) ** 2 + (1.0 - cr) ** 2)


def _argmax_member(front: ParetoFront, score_of) -> tuple[FrontMember, float]:
    if not front.members:
        raise ValueError("empty front")
    best_idx = 0
    best_score = score_of(front.members[0])
    for i, member in enumerate(front.members[1:], start=1):
        s = score_of(member)
        better = s > best_score
        if s == best_score:
            cur = front.members[best_idx]
            # Ties: fewer features, then lexicographically smaller bitmask.
            better = (member.n_selected, member.bitmask_hex) < (cur.n_selected, cur.bitmask_hex)
        if better:
            best_idx, best_score = i, s
    return front.members[best_idx], best_score


def representative_r1(
    front: ParetoFront, lam: float | None, gamma: float
) -> tuple[FrontMember, float]:
    """Best member by ``r1_score`` with the sigmoid mapping applied at
    (lam, gamma); falls back to the raw ratio when ``lam`` is None."""

    def score(member: FrontMember) -> float:
        cr = member.cr
        mapped = cr if lam is None else sigmoid_ratio(cr, lam, gamma)
        return r1_score(member.objectives.uar, mapped)

    return _argmax_member(front, score)


def representative_r1hat(front: ParetoFront) -> tuple[FrontMember, float]:
    """Best member by ``r1hat_score`` using held-out test UAR.

    Raises:
        ValueError: a member has no test UAR attached.
    """

    def score(member: FrontMember) -> float:
        if member.uar_test is None:
            raise ValueError("member has no test UAR; call attach_test_uar first")
        return r1hat_score(member.uar_test, member.cr)

    return _argmax_member(front, score)


def test_uar_of(
    bits: np.ndarray, pool: DataLike, test: DataLike, cfg: ObjectiveConfig
) -> float:
    """Generalization UAR: train on the full optimization pool, score on the
    held-out test partition, both projected to the chromosome's features."""
    train_fn, predict_fn = classifier.CLASSIFIERS[cfg.classifier_name]
    tree = train_fn(project(pool, bits), cfg.tree_max_depth)
    preds = predict_fn(tree, project(test, bits))
    return classifier.uar(preds, test.y, test.class_count)


def attach_test_uar(
    front: ParetoFront, pool: DataLike, test: DataLike, cfg: ObjectiveConfig
) -> ParetoFront:
    """Return a front whose members carry held-out test UAR values."""
    members = [
        replace(m, uar_test=test_uar_of(m.chromosome, pool, test, cfg))
        for m in front.members
    ]
    return ParetoFront(members=members, run_id=front.run_id, generation=front.generation)


def _member_row(member: FrontMember, front: ParetoFront) -> dict:
    r1hat = None if member.uar_test is None else r1hat_score(member.uar_test, member.cr)
    return {
        "run_id": front.run_id,
        "generation": front.generation,
        "n_selected": member.n_selected,
        "uar_validation": member.objectives.uar,
        "uar_test": member.uar_test,
        "cr": member.cr,
        "cr_lambda": member.objectives.cr_mapped,
        "m_dist": member.objectives.m_dist,
        "r1hat": r1hat,
        "bitmask_hex": member.bitmask_hex,
        "n_features": len(member.chromosome),
    }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)  # repr round-trips exactly
    return str(value)


def export_front(front: ParetoFront, path: str, fmt: str = "csv") -> None:
    """Write the front as CSV or JSON (atomically: temp file then rename).

    Members are sorted by (n_selected, -uar_validation, bitmask) so output
    bytes do not depend on discovery order.
    """
    members = sorted(
        front.members,
        key=lambda m: (m.n_selected, -m.objectives.uar, m.bitmask_hex),
    )
    ordered = ParetoFront(members=members, run_id=front.run_id, generation=front.generation)
    rows = [_member_row(m, ordered) for m in members]

    tmp = path + ".tmp"
    if fmt == "csv":
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(FRONT_COLUMNS)
            for row in rows:
                writer.writerow([_fmt(row[col]) for col in FRONT_COLUMNS])
    elif fmt == "json":
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump({"front": rows}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        raise ValueError(f"unknown front format {fmt!r}")
    os.replace(tmp, path)


def load_front(path: str) -> ParetoFront:
    """Re-import a CSV front written by :func:`export_front`.

    Objective values and bitmasks round-trip exactly.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        members = []
        run_id, generation = "", 0
        for row in reader:
            run_id = row["run_id"]
            generation = int(row["generation"]) if row["generation"] else 0
            bits = decode_bitmask(row["bitmask_hex"], int(row["n_features"]))
            objectives = ObjectiveVector(
                uar=float(row["uar_validation"]),
                cr_mapped=float(row["cr_lambda"]),
                m_dist=float(row["m_dist"]),
                n_selected=int(row["n_selected"]),
            )
            uar_test = float(row["uar_test"]) if row["uar_test"] else None
            members.append(FrontMember(bits, objectives, uar_test))
    return ParetoFront(members=members, run_id=run_id, generation=generation)


@dataclass(frozen=True)
class ReplicationSummary:
    """Medians and dispersion of the representative solutions across runs."""

    median_r1hat: float
    std_r1hat: float
    median_uar: float
    median_n_selected: float
    runs: int

    def to_dict(self) -> dict:
        return {
            "median_r1hat": self.median_r1hat,
            "std_r1hat": self.std_r1hat,
            "median_uar": self.median_uar,
            "median_n_selected": self.median_n_selected,
            "runs": self.runs,
        }


def summarize_replications(fronts: list[ParetoFront]) -> ReplicationSummary:
    """Summary of per-run representatives (fronts must carry test UAR)."""
    if not fronts:
        raise ValueError("no replications to summarize")
    scores, uars, sizes = [], [], []
    for front in fronts:
        member, score = representative_r1hat(front)
        scores.append(score)
        uars.append(member.uar_test)
        sizes.append(member.n_selected)
    return ReplicationSummary(
        median_r1hat=float(np.median(scores)),
        std_r1hat=float(np.std(scores)),
        median_uar=float(np.median(uars)),
        median_n_selected=float(np.median(sizes)),
        runs=len(fronts),
    )


def front_from_members(
    items: list[tuple[np.ndarray, ObjectiveVector]],
    n_objectives: int,
    run_id: str = "",
    generation: int = 0,
) -> ParetoFront:
    """Build a front from (chromosome, objectives) pairs, keeping only
    non-dominated entries and dropping duplicate chromosomes."""
    members: list[FrontMember] = []
    seen: set[bytes] = set()
    for bits, obj in items:
        key = np.packbits(bits).tobytes()
        if key in seen:
            continue
        if any(dominates(m.objectives, obj, n_objectives) for m in members):
            continue
        members = [m for m in members if not dominates(obj, m.objectives, n_objectives)]
        members.append(FrontMember(np.array(bits, dtype=bool), obj))
        seen.add(key)
    return ParetoFront(members=members, run_id=run_id, generation=generation)
