"""How big should the test set be?

Builds a test-size by delta grid for both tasks, then searches for the size
that pushes a one-point lead below a 5% false-claim probability.
"""

from pathlib import Path

from claimgate import build_grid, preset, required_n
from claimgate.reporting import grid_svg_text

ns = [50, 100, 250, 500, 1000, 2000, 4000]
deltas = [0.0, 0.005, 0.01, 0.02, 0.05]

for task in ("classification", "segmentation"):
    grid = build_grid(task, ns, deltas, base_performance=0.75, k=50_000, seed=42)
    print(f"\n{task} (runner-up at 0.75)")
    print("delta  " + " ".join(f"{n:>7}" for n in ns))
    for d, row in zip(deltas, grid.cells):
        print(f"{d:5.3f}  " + " ".join(f"{c.probabilities['median']:7.4f}" for c in row))
    print("bands  " + " ".join(f"{c.band:>7}" for c in grid.cells[2]) + "   (delta 0.01)")

out = Path(__file__).parent / "segmentation_grid.svg"
out.write_text(grid_svg_text(build_grid("segmentation", ns, deltas), {"demo": "planning_grid"}))
print(f"\nwrote {out}")

for task in ("classification", "segmentation"):
    res = required_n(task, delta=0.01, base_performance=0.80, congruence=preset(task), target_pfc=0.05)
    print(f"{task}: n >= {res.n} for pfc <= 5% at delta 0.01 ({res.evaluations} evaluations)")
