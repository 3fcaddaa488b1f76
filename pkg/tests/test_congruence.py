import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claimgate.classification import ClassificationComparison, congruence_bounds
from claimgate.congruence import (
    PairedClassificationOutcomes,
    PairedDscVectors,
    congruence_classification,
    congruence_quantiles,
    congruence_segmentation,
    read_paired_csv,
)
from claimgate.segmentation import DegenerateError
from claimgate.types import CONGRUENCE_PRESETS, CongruenceAssumption


def test_preset_values():
    assert CONGRUENCE_PRESETS["classification"] == {"q1": 0.47, "median": 0.67, "q3": 0.83}
    assert CONGRUENCE_PRESETS["segmentation"] == {"q1": 0.44, "median": 0.67, "q3": 0.82}


class TestClassification:
    def test_one_of_four(self):
        out = congruence_classification(PairedClassificationOutcomes((1, 1, 0, 0), (1, 0, 1, 0)))
        assert out.value == 0.25 and out.provenance == "empirical"

    def test_identical_hits_upper_bound(self):
        a = (1, 0, 1, 1, 0, 1)
        oc = PairedClassificationOutcomes(a, a)
        assert congruence_classification(oc).value == pytest.approx(oc.accuracies[0])

    def test_complementary_hits_lower_bound(self):
        a = (1, 0, 1, 0, 0)
        b = tuple(1 - v for v in a)
        assert congruence_classification(PairedClassificationOutcomes(a, b)).value == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            PairedClassificationOutcomes((), ())
        with pytest.raises(ValueError):
            PairedClassificationOutcomes((1, 0), (1,))
        with pytest.raises(ValueError):
            PairedClassificationOutcomes((2, 0), (1, 0))

    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=200))
    @settings(max_examples=200, deadline=None)
    def test_within_bounds(self, pairs):
        a, b = zip(*pairs)
        oc = PairedClassificationOutcomes(a, b)
        acc = sorted(oc.accuracies, reverse=True)
        lo, hi = congruence_bounds(ClassificationComparison(oc.n, acc[0], acc[1]))
        v = congruence_classification(oc).value
        assert lo - 1e-12 <= v <= hi + 1e-12


class TestSegmentation:
    def test_identical(self):
        a = (0.8, 0.9, 0.7, 0.6)
        assert congruence_segmentation(PairedDscVectors(a, a)).value == pytest.approx(1.0)

    def test_affine_decreasing(self):
        a = (0.8, 0.9, 0.7, 0.6)
        b = tuple(0.95 - 0.5 * v for v in a)
        assert congruence_segmentation(PairedDscVectors(a, b)).value == pytest.approx(-1.0)

    def test_hand_computed(self):
        # centred: da = (.05, .15, -.05, -.15), db = (.0075, .1075, -.0225, -.0925)
        expected = 0.0315 / math.sqrt(0.05 * 0.020675)
        out = congruence_segmentation(PairedDscVectors((0.8, 0.9, 0.7, 0.6), (0.75, 0.85, 0.72, 0.65)))
        assert out.value == pytest.approx(expected, abs=1e-12)

    def test_zero_variance(self):
        with pytest.raises(DegenerateError):
            congruence_segmentation(PairedDscVectors((0.5, 0.5, 0.5), (0.1, 0.2, 0.3)))

    def test_needs_three(self):
        with pytest.raises(ValueError):
            PairedDscVectors((0.1, 0.2), (0.1, 0.2))

    def test_affine_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.uniform(0.3, 0.9, 30)
            b = np.clip(a + rng.normal(0, 0.05, 30), 0, 1)
            base = congruence_segmentation(PairedDscVectors(tuple(a), tuple(b))).value
            scaled = congruence_segmentation(PairedDscVectors(tuple(0.5 * a + 0.1), tuple(b))).value
            assert scaled == pytest.approx(base, abs=1e-12)


class TestQuantiles:
    def test_single(self):
        assert congruence_quantiles([0.5]) == (0.5, 0.5, 0.5)

    def test_linear_interpolation(self):
        # positions (n-1)p = 0.75, 1.5, 2.25 between order statistics
        assert congruence_quantiles([0.1, 0.2, 0.3, 0.4]) == pytest.approx((0.175, 0.25, 0.325))

    def test_permutation_invariant(self):
        vals = [0.3, 0.9, 0.1, 0.5, 0.7]
        ref = congruence_quantiles(vals)
        for perm in itertools.permutations(vals):
            assert congruence_quantiles(list(perm)) == ref

    def test_accepts_assumptions(self):
        vals = [CongruenceAssumption(v, "empirical") for v in (0.2, 0.4)]
        assert congruence_quantiles(vals)[1] == pytest.approx(0.3)

    def test_empty(self):
        with pytest.raises(ValueError):
            congruence_quantiles([])

    @given(st.lists(st.floats(-1, 1), min_size=1, max_size=40), st.floats(0, 0.5))
    @settings(max_examples=100, deadline=None)
    def test_monotone_and_ordered(self, vals, shift):
        q = congruence_quantiles(vals)
        assert q[0] <= q[1] <= q[2]
        q2 = congruence_quantiles([v + shift for v in vals])
        assert all(b >= a - 1e-12 for a, b in zip(q, q2))


class TestCsv:
    def test_classification_csv(self, tmp_path):
        p = tmp_path / "pairs.csv"
        p.write_text("id,a,b\n1,1,1\n2,1,0\n3,0,1\n4,0,0\n")
        data = read_paired_csv(p, "classification")
        assert congruence_classification(data).value == 0.25

    def test_segmentation_csv(self, tmp_path):
        p = tmp_path / "pairs.csv"
        p.write_text("id,a,b\nx,0.8,0.75\ny,0.9,0.85\nz,0.7,0.72\nw,0.6,0.65\n")
        data = read_paired_csv(p, "segmentation")
        assert congruence_segmentation(data).value == pytest.approx(0.0315 / math.sqrt(0.05 * 0.020675))

    def test_bad_header(self, tmp_path):
        p = tmp_path / "pairs.csv"
        p.write_text("image,a,b\n1,1,1\n")
        with pytest.raises(ValueError, match="id,a,b"):
            read_paired_csv(p, "classification")
