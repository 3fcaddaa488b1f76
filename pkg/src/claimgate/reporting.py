"""Serialization of reports: JSON, CSV and the corpus output bundle.

Every artifact carries the run configuration.  JSON embeds it under
``"config"``; CSV files start with one ``# run-config: {...}`` comment line.
Output is byte-stable for a given configuration.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .corpus import CorpusReport, RecordEstimate, Rejection
from .planner import PlanningGrid, grid_svg


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_line(config: Mapping[str, Any]) -> str:
    return "# run-config: " + json.dumps(config, sort_keys=True, separators=(",", ":")) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]], config: Mapping[str, Any] | None = None) -> str:
    buf = io.StringIO()
    if config is not None:
        buf.write(config_line(config))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def read_config_line(text: str) -> dict:
    first = text.splitlines()[0]
    if not first.startswith("# run-config: "):
        raise ValueError("artifact has no run-config header")
    return json.loads(first[len("# run-config: "):])


ESTIMATE_COLUMNS = (
    "paper_id", "row", "task", "preset", "congruence", "clamped", "probability",
    "method", "k", "std_err", "sd_imputed", "flags",
)


def estimate_row(preset_name: str, e: RecordEstimate) -> list[Any]:
    est = e.estimate
    return [
        e.record.paper_id, e.record.row, e.record.task, preset_name, est.congruence_used.value,
        int(est.congruence_used.clamped), est.probability, est.method, est.k, est.std_err,
        int(e.sd_imputed), ";".join(e.flags),
    ]


def _record_dict(e: RecordEstimate) -> dict:
    r = e.record
    return {
        "paper_id": r.paper_id, "row": r.row, "task": r.task, "n_test": r.n_test,
        "metric_a": r.metric_a, "metric_b": r.metric_b,
        "estimate": e.estimate.to_dict(), "sd_imputed": e.sd_imputed, "flags": list(e.flags),
    }


def _rejection_dict(r: Rejection) -> dict:
    return {"row": r.row, "paper_id": r.paper_id, "stage": "ingest", "reason": r.reason, "detail": r.detail}


def corpus_report_dict(report: CorpusReport, config: Mapping[str, Any]) -> dict:
    rejections = [_rejection_dict(r) for r in report.rejections]
    rejections += [
        {"row": rec.row, "paper_id": rec.paper_id, "stage": "eligibility", "reason": why, "detail": ""}
        for rec, why in report.excluded
    ]
    return {
        "config": dict(config),
        "summary": {t: s.to_dict() for t, s in report.summaries.items()},
        "counts": {
            "rows_parsed": len(report.records),
            "rows_rejected": len(report.rejections),
            "rows_eligible": len(report.eligible),
            "rows_excluded": len(report.excluded),
        },
        "records": {name: [_record_dict(e) for e in ests] for name, ests in report.estimates.items()},
        "threshold_curves": {
            t: {name: {lvl: c.to_dict() for lvl, c in levels.items()} for name, levels in per.items()}
            for t, per in report.curves.items()
        },
        "rejections": rejections,
    }


def write_corpus_bundle(report: CorpusReport, out_dir: str | Path, config: Mapping[str, Any]) -> list[Path]:
    """Write report.json, estimates.csv, curve_<preset>.csv and rejections.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name: str, text: str) -> None:
        path = out / name
        path.write_text(text)
        written.append(path)

    doc = corpus_report_dict(report, config)
    put("report.json", dumps(doc))
    put(
        "estimates.csv",
        csv_text(
            ESTIMATE_COLUMNS,
            (estimate_row(name, e) for name, ests in report.estimates.items() for e in ests),
            config,
        ),
    )
    for name in report.estimates:
        rows = []
        for t, per in report.curves.items():
            for lvl, curve in per.get(name, {}).items():
                rows.extend((t, lvl, curve.n, th, pct) for th, pct in zip(curve.thresholds, curve.cumulative_pct))
        put(f"curve_{name}.csv", csv_text(("task", "level", "n", "threshold", "cumulative_pct"), rows, config))
    put(
        "rejections.csv",
        csv_text(
            ("row", "paper_id", "stage", "reason", "detail"),
            ((r["row"], r["paper_id"], r["stage"], r["reason"], r["detail"]) for r in doc["rejections"]),
            config,
        ),
    )
    return written


GRID_COLUMNS = ("n", "delta", "preset", "probability", "band", "flags")


def grid_csv(grid: PlanningGrid, config: Mapping[str, Any]) -> str:
    return csv_text(GRID_COLUMNS, grid.long_rows(), config)


def grid_svg_text(grid: PlanningGrid, config: Mapping[str, Any]) -> str:
    return grid_svg(grid, json.dumps(config, sort_keys=True, separators=(",", ":")))
