"""Empirical model congruence from paired per-image outputs."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .kernels import type7_quantiles
from .segmentation import DegenerateError
from .types import CongruenceAssumption


@dataclass(frozen=True)
class PairedClassificationOutcomes:
    correct_a: tuple[bool, ...]
    correct_b: tuple[bool, ...]

    def __post_init__(self) -> None:
        a = tuple(_as_bool(v) for v in self.correct_a)
        b = tuple(_as_bool(v) for v in self.correct_b)
        if len(a) != len(b):
            raise ValueError(f"paired outcomes differ in length ({len(a)} vs {len(b)})")
        if not a:
            raise ValueError("paired outcomes are empty")
        object.__setattr__(self, "correct_a", a)
        object.__setattr__(self, "correct_b", b)

    @property
    def n(self) -> int:
        return len(self.correct_a)

    @property
    def accuracies(self) -> tuple[float, float]:
        return sum(self.correct_a) / self.n, sum(self.correct_b) / self.n


@dataclass(frozen=True)
class PairedDscVectors:
    dsc_a: tuple[float, ...]
    dsc_b: tuple[float, ...]

    def __post_init__(self) -> None:
        a = tuple(float(v) for v in self.dsc_a)
        b = tuple(float(v) for v in self.dsc_b)
        if len(a) != len(b):
            raise ValueError(f"paired DSC vectors differ in length ({len(a)} vs {len(b)})")
        if len(a) < 3:
            raise ValueError("need at least three paired DSC values")
        if not all(math.isfinite(v) and 0.0 <= v <= 1.0 for v in a + b):
            raise ValueError("DSC values must lie in [0, 1]")
        object.__setattr__(self, "dsc_a", a)
        object.__setattr__(self, "dsc_b", b)


def _as_bool(v) -> bool:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if v in (0, 1):
        return bool(v)
    raise ValueError(f"classification outcome must be 0/1 or boolean, got {v!r}")


def congruence_classification(outcomes: PairedClassificationOutcomes) -> CongruenceAssumption:
    """Fraction of images both classifiers got right."""
    both = sum(a and b for a, b in zip(outcomes.correct_a, outcomes.correct_b))
    return CongruenceAssumption(both / outcomes.n, "empirical")


def congruence_segmentation(vectors: PairedDscVectors) -> CongruenceAssumption:
    """Pearson correlation of per-image DSC."""
    a = np.asarray(vectors.dsc_a)
    b = np.asarray(vectors.dsc_b)
    da = a - a.mean()
    db = b - b.mean()
    ssa = float(da @ da)
    ssb = float(db @ db)
    if ssa == 0.0 or ssb == 0.0:
        raise DegenerateError("correlation undefined: a DSC vector has zero variance")
    r = float(da @ db) / math.sqrt(ssa * ssb)
    return CongruenceAssumption(min(1.0, max(-1.0, r)), "empirical")


def congruence_quantiles(values: Sequence[CongruenceAssumption | float]) -> tuple[float, float, float]:
    """``(q1, median, q3)`` with linear interpolation between order statistics."""
    if len(values) == 0:
        raise ValueError("congruence_quantiles needs at least one value")
    raw = [v.value if isinstance(v, CongruenceAssumption) else float(v) for v in values]
    q1, med, q3 = type7_quantiles(raw, (0.25, 0.5, 0.75))
    return q1, med, q3


def read_paired_csv(path: str | Path, task: str) -> PairedClassificationOutcomes | PairedDscVectors:
    """Read a paired-output CSV with header ``id,a,b`` (one row per image)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        if header[:3] != ["id", "a", "b"]:
            raise ValueError(f"paired-output CSV must start with columns id,a,b; got {header}")
        rows: Iterable[dict] = list(reader)
    a_col, b_col = [], []
    for lineno, row in enumerate(rows, start=2):
        try:
            if task == "classification":
                a_col.append(_as_bool(int(row["a"])))
                b_col.append(_as_bool(int(row["b"])))
            else:
                a_col.append(float(row["a"]))
                b_col.append(float(row["b"]))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if task == "classification":
        return PairedClassificationOutcomes(tuple(a_col), tuple(b_col))
    if task == "segmentation":
        return PairedDscVectors(tuple(a_col), tuple(b_col))
    raise ValueError(f"unknown task {task!r}")
