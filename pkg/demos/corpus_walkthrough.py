"""Screen a table of extracted leaderboard results.

Reads a corpus CSV and reports, per threshold, the share of winning margins
whose false-claim probability exceeds it.
"""

import sys
from pathlib import Path

from claimgate import analyze_corpus, ingest_corpus

path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "data" / "sample_corpus.csv"
records, rejections = ingest_corpus(path)
print(f"{len(records)} rows parsed, {len(rejections)} rejected")
for r in rejections:
    print(f"  row {r.row}: {r.reason}")

report = analyze_corpus(records, rejections, k=50_000, seed=42)
for rec, reason in report.excluded:
    print(f"excluded {rec.paper_id}: {reason}")

for task, s in report.summaries.items():
    q1, med, q3 = s.test_size_quartiles
    print(f"\n{task}: {s.n_eligible} eligible, median delta {s.median_delta:.3f}, test size {med} ({q1}-{q3})")
    curves = report.curves[task]
    thresholds = curves["median"]["row"].thresholds
    print("  threshold  " + "  ".join(f"{t:>5.2f}" for t in thresholds))
    for name in ("q1", "median", "q3"):
        pct = curves[name]["row"].cumulative_pct
        print(f"  {name:>9}  " + "  ".join(f"{v:5.1f}" for v in pct))

# the per-record table keeps flags such as clamped congruence or imputed SDs
for e in report.estimates["median"][:5]:
    print(e.record.paper_id, e.record.task, f"{e.probability:.4f}", ",".join(e.flags) or "-")
