"""Is a small lead on a leaderboard believable?

Walks through one classification comparison and one segmentation comparison,
first with the preset congruence values and then across the plausible range.
"""

import numpy as np

from claimgate import (
    ClassificationComparison,
    CongruenceAssumption,
    SegmentationComparison,
    clamp_congruence,
    congruence_bounds,
    pfc_classification,
    pfc_classification_exact,
    pfc_segmentation,
    preset,
)
from claimgate.kernels import RngStream

# two classifiers, 500 test images, one point of accuracy apart
cmp = ClassificationComparison(n=500, acc_a=0.81, acc_b=0.80)
lo, hi = congruence_bounds(cmp)
print(f"feasible joint-correct fraction: [{lo:.2f}, {hi:.2f}]")

for name in ("q1", "median", "q3"):
    c = clamp_congruence(cmp, preset("classification", name))
    est = pfc_classification(cmp, c, k=200_000, rng=RngStream(42))
    exact = pfc_classification_exact(cmp, c).probability
    print(f"  {name:>6}: p11={c.value:.2f}  pfc={est.probability:.4f} +/- {est.std_err:.4f}  (exact {exact:.4f})")

# higher agreement between the models means less noise in the difference
for p11 in np.linspace(lo, hi, 5):
    p = pfc_classification_exact(cmp, CongruenceAssumption(float(p11))).probability
    print(f"  p11={p11:.3f} -> {p:.4f}")

# segmentation: 62 images, mean DSC 0.81 vs 0.80, no SDs reported
seg = SegmentationComparison(n=62, dsc_a=0.81, dsc_b=0.80)
for variant in ("q1", "point", "q3"):
    est = pfc_segmentation(seg, preset("segmentation"), sd_source=f"imputed-{variant}")
    print(f"segmentation, imputed SD ({variant}): pfc={est.probability:.4f}")

# with SDs reported the closed form is used as is
seg = SegmentationComparison(n=25, dsc_a=0.85, dsc_b=0.83, sd_a=0.1, sd_b=0.1)
print(f"n=25, sd 0.1, r=0.67: pfc={pfc_segmentation(seg, CongruenceAssumption(0.67)).probability:.4f}")
