"""Corpus-level analysis of extracted benchmark comparisons.

Input is a CSV with one comparison per row::

    paper_id,task,split,n_test,metric_a,metric_b,sd_a,sd_b,metric_scale

``metric_a`` is the reported winner.  Rows that cannot be parsed are
reported with a reason code instead of aborting the run.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .classification import ClassificationComparison, clamp_congruence, pfc_classification
from .kernels import RngStream, type7_quantiles
from .segmentation import (
    DEFAULT_IMPUTATION,
    DegenerateError,
    SdImputationModel,
    SegmentationComparison,
    impute_sd,
    pfc_segmentation,
)
from .types import PRESET_NAMES, TASKS, CongruenceAssumption, PfcEstimate, preset

SCHEMA_VERSION = "1"
CORPUS_COLUMNS: tuple[str, ...] = (
    "paper_id", "task", "split", "n_test", "metric_a", "metric_b", "sd_a", "sd_b", "metric_scale",
)
SPLITS: tuple[str, ...] = ("train-test", "train-val-test", "cv-plus-test", "cv-only", "none-reported")
SCALES: tuple[str, ...] = ("unit", "percent")
NO_TEST_SPLITS = frozenset({"cv-only", "none-reported"})
DEFAULT_THRESHOLDS: tuple[float, ...] = (0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45)


@dataclass(frozen=True)
class CorpusRecord:
    """One extracted comparison, with metrics normalized to unit scale."""

    paper_id: str
    task: str
    split: str
    n_test: int | None
    metric_a: float | None
    metric_b: float | None
    sd_a: float | None = None
    sd_b: float | None = None
    metric_scale: str = "unit"
    row: int = 0

    @property
    def delta(self) -> float | None:
        if self.metric_a is None or self.metric_b is None:
            return None
        return self.metric_a - self.metric_b


@dataclass(frozen=True)
class Rejection:
    row: int
    paper_id: str
    reason: str
    detail: str = ""


class CorpusSchemaError(ValueError):
    """Header does not match the documented corpus schema."""


def _opt_float(raw: str, name: str) -> float | None:
    raw = (raw or "").strip()
    if raw == "" or raw.lower() in ("na", "nan", "none"):
        return None
    try:
        v = float(raw)
    except ValueError:
        raise _RowError("bad-number", f"{name}={raw!r} is not a number") from None
    if not math.isfinite(v):
        raise _RowError("bad-number", f"{name}={raw!r} is not finite")
    return v


class _RowError(Exception):
    def __init__(self, reason: str, detail: str) -> None:
        super().__init__(detail)
        self.reason = reason
        self.detail = detail


def parse_row(row: Mapping[str, str], lineno: int) -> CorpusRecord:
    paper_id = (row.get("paper_id") or "").strip()
    if not paper_id:
        raise _RowError("missing-paper-id", "paper_id is empty")
    task = (row.get("task") or "").strip().lower()
    if task not in TASKS:
        raise _RowError("bad-task", f"task={task!r}")
    split = (row.get("split") or "").strip().lower()
    if split not in SPLITS:
        raise _RowError("bad-split", f"split={split!r}")
    scale = (row.get("metric_scale") or "unit").strip().lower()
    if scale not in SCALES:
        raise _RowError("bad-scale", f"metric_scale={scale!r}")

    n_raw = _opt_float(row.get("n_test", ""), "n_test")
    n_test = None
    if n_raw is not None:
        if n_raw != int(n_raw) or n_raw < 1:
            raise _RowError("bad-test-size", f"n_test={n_raw} is not a positive integer")
        n_test = int(n_raw)

    factor = 100.0 if scale == "percent" else 1.0
    values = {}
    for name in ("metric_a", "metric_b", "sd_a", "sd_b"):
        v = _opt_float(row.get(name, ""), name)
        values[name] = None if v is None else v / factor
    for name in ("metric_a", "metric_b"):
        v = values[name]
        if v is not None and not 0.0 <= v <= 1.0:
            raise _RowError("metric-out-of-range", f"{name}={v * factor} outside the {scale} range")
    for name in ("sd_a", "sd_b"):
        v = values[name]
        if v is not None and v < 0:
            raise _RowError("negative-sd", f"{name}={v * factor}")
    if values["metric_a"] is not None and values["metric_b"] is not None:
        if values["metric_b"] > values["metric_a"]:
            raise _RowError(
                "rank-order-violation",
                f"metric_b={values['metric_b'] * factor} exceeds metric_a={values['metric_a'] * factor}",
            )
    return CorpusRecord(paper_id, task, split, n_test, row=lineno, metric_scale=scale, **values)


def ingest_corpus(path: str | Path, schema_version: str = SCHEMA_VERSION) -> tuple[list[CorpusRecord], list[Rejection]]:
    """Parse a corpus CSV into records plus a per-row rejection report.

    A header that does not match :data:`CORPUS_COLUMNS` is fatal; bad rows are not.
    """
    if str(schema_version) != SCHEMA_VERSION:
        raise CorpusSchemaError(f"unsupported corpus schema version {schema_version!r}")
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    header = tuple(h.strip() for h in (reader.fieldnames or ()))
    if header != CORPUS_COLUMNS:
        raise CorpusSchemaError(f"corpus header must be {','.join(CORPUS_COLUMNS)}; got {','.join(header)}")
    records: list[CorpusRecord] = []
    rejections: list[Rejection] = []
    for lineno, row in enumerate(reader, start=2):
        if None in row or any(v is None for v in row.values()):
            rejections.append(Rejection(lineno, (row.get("paper_id") or "").strip(), "bad-column-count"))
            continue
        try:
            records.append(parse_row(row, lineno))
        except _RowError as err:
            rejections.append(Rejection(lineno, (row.get("paper_id") or "").strip(), err.reason, err.detail))
    return records, rejections


def filter_eligible(records: Iterable[CorpusRecord]) -> tuple[list[CorpusRecord], list[tuple[CorpusRecord, str]]]:
    """Keep records with an independent test set, both metrics and a test-set size."""
    eligible: list[CorpusRecord] = []
    excluded: list[tuple[CorpusRecord, str]] = []
    for rec in records:
        if rec.split in NO_TEST_SPLITS:
            excluded.append((rec, "no-independent-test"))
        elif rec.metric_a is None or rec.metric_b is None:
            excluded.append((rec, "missing-metric"))
        elif rec.n_test is None:
            excluded.append((rec, "missing-test-size"))
        elif rec.task == "segmentation" and rec.n_test < 2:
            excluded.append((rec, "test-size-too-small"))
        else:
            eligible.append(rec)
    return eligible, excluded


@dataclass(frozen=True)
class RecordEstimate:
    record: CorpusRecord
    estimate: PfcEstimate
    sd_imputed: bool = False
    flags: tuple[str, ...] = ()

    @property
    def probability(self) -> float:
        return self.estimate.probability


def _congruence_for(task: str, congruence: str | Mapping[str, CongruenceAssumption]) -> CongruenceAssumption:
    if isinstance(congruence, str):
        return preset(task, congruence)
    return congruence[task]


def _segmentation_sds(rec: CorpusRecord, variant: str, model: SdImputationModel) -> tuple[float, float, bool, list[str]]:
    flags: list[str] = []
    sds = []
    for mean, sd in ((rec.metric_a, rec.sd_a), (rec.metric_b, rec.sd_b)):
        if sd is not None:
            sds.append(sd)
            continue
        try:
            sds.append(impute_sd(mean, model, variant))  # type: ignore[arg-type]
        except DegenerateError:
            sds.append(0.0)
            flags.append("sd-boundary")
    imputed = rec.sd_a is None or rec.sd_b is None
    return sds[0], sds[1], imputed, flags


def estimate_record(
    rec: CorpusRecord,
    congruence: str | Mapping[str, CongruenceAssumption] = "median",
    impute_variant: str = "point",
    k: int = 200_000,
    seed: int = 42,
    model: SdImputationModel = DEFAULT_IMPUTATION,
) -> RecordEstimate:
    assumed = _congruence_for(rec.task, congruence)
    assert rec.metric_a is not None and rec.metric_b is not None and rec.n_test is not None
    if rec.task == "classification":
        cmp = ClassificationComparison(rec.n_test, rec.metric_a, rec.metric_b)
        used = clamp_congruence(cmp, assumed)
        est = pfc_classification(cmp, used, k, RngStream(seed))
        flags = ("clamped",) if used.clamped else ()
        return RecordEstimate(rec, est, False, flags)
    sd_a, sd_b, imputed, flags = _segmentation_sds(rec, impute_variant, model)
    cmp = SegmentationComparison(rec.n_test, rec.metric_a, rec.metric_b, sd_a, sd_b)
    est = pfc_segmentation(cmp, assumed, "reported")
    if est.degenerate:
        flags.append("degenerate")
    return RecordEstimate(rec, est, imputed, tuple(flags))


def corpus_pfc(
    eligible: Sequence[CorpusRecord],
    congruence: str | Mapping[str, CongruenceAssumption] = "median",
    impute_variant: str = "point",
    k: int = 200_000,
    seed: int = 42,
    *,
    model: SdImputationModel = DEFAULT_IMPUTATION,
    workers: int = 1,
) -> list[RecordEstimate]:
    """One estimate per record, in input order.

    Every record draws from the same ``RngStream(seed)``, so identical records
    give identical estimates and the output does not depend on ``workers``.
    """

    def run(rec: CorpusRecord) -> RecordEstimate:
        return estimate_record(rec, congruence, impute_variant, k, seed, model)

    if workers <= 1:
        return [run(r) for r in eligible]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, eligible))


@dataclass(frozen=True)
class ThresholdCurve:
    thresholds: tuple[float, ...]
    cumulative_pct: tuple[float, ...]
    n: int

    def to_dict(self) -> dict:
        return {"thresholds": list(self.thresholds), "cumulative_pct": list(self.cumulative_pct), "n": self.n}


def _probabilities(estimates: Iterable[float | PfcEstimate | RecordEstimate]) -> list[float]:
    out = []
    for e in estimates:
        out.append(float(e.probability) if hasattr(e, "probability") else float(e))
    return out


def threshold_curve(
    estimates: Sequence[float | PfcEstimate | RecordEstimate], thresholds: Sequence[float] = DEFAULT_THRESHOLDS
) -> ThresholdCurve:
    """Percentage of estimates strictly above each threshold."""
    probs = np.asarray(_probabilities(estimates))
    if probs.size == 0:
        raise ValueError("threshold_curve needs at least one estimate")
    ts = [float(t) for t in thresholds]
    if not ts or any(not 0.0 < t <= 0.5 for t in ts):
        raise ValueError(f"thresholds must lie in (0, 0.5], got {ts}")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("thresholds must be strictly ascending")
    pct = tuple(100.0 * int(np.count_nonzero(probs > t)) / probs.size for t in ts)
    return ThresholdCurve(tuple(ts), pct, int(probs.size))


def paper_level(estimates: Sequence[RecordEstimate]) -> list[RecordEstimate]:
    """First row per ``paper_id``, taken as that paper's headline comparison."""
    seen: set[str] = set()
    out = []
    for e in estimates:
        if e.record.paper_id not in seen:
            seen.add(e.record.paper_id)
            out.append(e)
    return out


@dataclass(frozen=True)
class CorpusSummary:
    n_total: int
    n_eligible: int
    median_delta: float | None
    mean_delta: float | None
    test_size_quartiles: tuple[float, float, float] | None

    def to_dict(self) -> dict:
        q = self.test_size_quartiles
        return {
            "n_total": self.n_total,
            "n_eligible": self.n_eligible,
            "median_delta": self.median_delta,
            "mean_delta": self.mean_delta,
            "test_size_quartiles": None if q is None else {"q1": q[0], "median": q[1], "q3": q[2]},
        }


def summarize(records: Sequence[CorpusRecord]) -> CorpusSummary:
    """Delta and test-size statistics; quartiles use linear interpolation."""
    if len(records) == 0:
        raise ValueError("cannot summarize an empty corpus")
    eligible, _ = filter_eligible(records)
    deltas = [r.delta for r in records if r.delta is not None]
    sizes = [r.n_test for r in records if r.n_test is not None]
    median_delta = mean_delta = None
    if deltas:
        median_delta = type7_quantiles(deltas, (0.5,))[0]
        mean_delta = float(np.mean(deltas))
    quart = type7_quantiles(sizes, (0.25, 0.5, 0.75)) if sizes else None
    return CorpusSummary(len(records), len(eligible), median_delta, mean_delta, quart)  # type: ignore[arg-type]


@dataclass
class CorpusReport:
    """Everything a corpus run produces, ready for serialization."""

    records: list[CorpusRecord]
    rejections: list[Rejection]
    eligible: list[CorpusRecord]
    excluded: list[tuple[CorpusRecord, str]]
    estimates: dict[str, list[RecordEstimate]]
    curves: dict[str, dict[str, dict[str, ThresholdCurve]]] = field(default_factory=dict)
    summaries: dict[str, CorpusSummary] = field(default_factory=dict)


def analyze_corpus(
    records: Sequence[CorpusRecord],
    rejections: Sequence[Rejection] = (),
    *,
    task: str | None = None,
    presets: Sequence[str] = PRESET_NAMES,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    impute_variant: str = "point",
    k: int = 200_000,
    seed: int = 42,
    model: SdImputationModel = DEFAULT_IMPUTATION,
    workers: int = 1,
) -> CorpusReport:
    """Run the full pipeline: filter, estimate under each preset, build curves."""
    if task is not None:
        if task not in TASKS:
            raise ValueError(f"unknown task {task!r}")
        records = [r for r in records if r.task == task]
    eligible, excluded = filter_eligible(records)
    estimates = {
        name: corpus_pfc(eligible, name, impute_variant, k, seed, model=model, workers=workers) for name in presets
    }
    report = CorpusReport(list(records), list(rejections), eligible, excluded, estimates)
    for t in TASKS:
        task_records = [r for r in records if r.task == t]
        if not task_records:
            continue
        report.summaries[t] = summarize(task_records)
        per_task: dict[str, dict[str, ThresholdCurve]] = {}
        for name in presets:
            rows = [e for e in estimates[name] if e.record.task == t]
            if rows:
                per_task[name] = {
                    "row": threshold_curve(rows, thresholds),
                    "paper": threshold_curve(paper_level(rows), thresholds),
                }
        if per_task:
            report.curves[t] = per_task
    return report
