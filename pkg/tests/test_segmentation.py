import math

import numpy as np
import pytest
from scipy import integrate

from claimgate.kernels import RngStream, student_t_pdf
from claimgate.segmentation import (
    DegenerateError,
    SdImputationModel,
    SegmentationComparison,
    impute_sd,
    pfc_segmentation,
    pfc_segmentation_mc_check,
    resolve_sds,
)
from claimgate.types import CongruenceAssumption, InvariantError, preset


def S(n, a, b, sa=None, sb=None):
    return SegmentationComparison(n, a, b, sa, sb)


def r(v):
    return CongruenceAssumption(v)


def t_cdf_quad(z, dof):
    return integrate.quad(lambda t: student_t_pdf(t, dof), -np.inf, z, epsabs=1e-13)[0]


class TestComparison:
    def test_needs_two_images(self):
        with pytest.raises(ValueError):
            S(1, 0.8, 0.7, 0.1, 0.1)

    def test_rank_order(self):
        with pytest.raises(ValueError, match="rank-order"):
            S(10, 0.7, 0.8, 0.1, 0.1)

    def test_negative_sd(self):
        with pytest.raises(ValueError):
            S(10, 0.8, 0.7, -0.1, 0.1)


class TestImputation:
    def test_default_at_half(self):
        assert impute_sd(0.5) == pytest.approx(0.4 * 0.5)

    def test_default_at_085(self):
        assert impute_sd(0.85) == pytest.approx(0.1429, abs=1e-4)
        assert impute_sd(0.85) == pytest.approx(0.4 * math.sqrt(0.85 * 0.15))

    def test_variant_order(self):
        for m in np.linspace(0.01, 0.99, 50):
            assert impute_sd(m, variant="q1") <= impute_sd(m) <= impute_sd(m, variant="q3")
            assert impute_sd(m) > 0

    @pytest.mark.parametrize("m", [0.0, 1.0])
    def test_boundaries_degenerate(self, m):
        with pytest.raises(DegenerateError):
            impute_sd(m)

    def test_user_table(self):
        model = SdImputationModel(kind="user-table", table=((0.5, 0.2), (0.9, 0.1)))
        assert impute_sd(0.7, model) == pytest.approx(0.15)
        assert impute_sd(0.7, model, "q3") == pytest.approx(0.15 * 1.3)

    def test_resolve_keeps_reported(self):
        cmp = S(30, 0.8, 0.7, 0.05, None)
        sd_a, sd_b, imputed = resolve_sds(cmp, "imputed-q1")
        assert sd_a == 0.05 and sd_b == pytest.approx(0.7 * impute_sd(0.7)) and imputed
        with pytest.raises(ValueError):
            resolve_sds(cmp, "reported")


class TestClosedForm:
    def test_equal_means_exact_half(self):
        est = pfc_segmentation(S(62, 0.8, 0.8, 0.1, 0.12), preset("segmentation"))
        assert est.probability == 0.5
        assert est.method == "closed-form"

    def test_hand_worked_fixture(self):
        z = math.sqrt(25) * (-0.02) / math.sqrt(0.0066)  # 0.01 + 0.01 - 2 * 0.01 * 0.67
        assert z == pytest.approx(-1.2309, abs=1e-4)
        est = pfc_segmentation(S(25, 0.85, 0.83, 0.1, 0.1), r(0.67))
        assert est.probability == pytest.approx(t_cdf_quad(z, 24), abs=1e-10)
        assert est.probability == pytest.approx(0.115, abs=1e-3)

    def test_typical_small_lead_is_doubtful(self):
        est = pfc_segmentation(S(62, 0.81, 0.80), r(0.67), "imputed-point")
        assert est.probability > 0.05

    def test_degenerate_denominator(self):
        est = pfc_segmentation(S(20, 0.8, 0.7, 0.1, 0.1), r(1.0))
        assert est.degenerate and est.probability == 0.0
        est = pfc_segmentation(S(20, 0.8, 0.8, 0.1, 0.1), r(1.0))
        assert est.degenerate and est.probability == 0.5

    def test_r_range(self):
        with pytest.raises(ValueError):
            pfc_segmentation(S(20, 0.8, 0.7, 0.1, 0.1), r(-1.0))

    def test_negative_variance_guard(self):
        from claimgate import segmentation as mod

        with pytest.raises(InvariantError):
            mod._diff_sd(0.1, 0.1, 1.5)


class TestMonteCarloCheck:
    def test_symmetric(self):
        est = pfc_segmentation_mc_check(S(30, 0.7, 0.7, 0.1, 0.1), r(0.5), k=200_000, rng=RngStream(1))
        assert abs(est.probability - 0.5) <= 3 * est.std_err

    def test_fixture(self):
        cmp = S(25, 0.85, 0.83, 0.1, 0.1)
        mc = pfc_segmentation_mc_check(cmp, r(0.67), k=200_000, rng=RngStream(2))
        cf = pfc_segmentation(cmp, r(0.67))
        assert abs(mc.probability - cf.probability) <= 3 * mc.std_err

    def test_large_delta(self):
        cmp = S(100, 0.9, 0.7, 0.1, 0.1)
        assert pfc_segmentation(cmp, r(0.67)).probability < 1e-6
        assert pfc_segmentation_mc_check(cmp, r(0.67), k=200_000, rng=RngStream(3)).probability < 1e-6

    def test_worker_independent(self):
        cmp = S(40, 0.8, 0.78, 0.1, 0.12)
        a = pfc_segmentation_mc_check(cmp, r(0.6), k=120_000, rng=RngStream(4), workers=1)
        b = pfc_segmentation_mc_check(cmp, r(0.6), k=120_000, rng=RngStream(4), workers=3)
        assert a == b


def _cfgs(seed, count=20):
    rng = np.random.default_rng(seed)
    return [
        (int(rng.integers(3, 500)), rng.uniform(0.4, 0.85), rng.uniform(0.03, 0.25), rng.uniform(0.03, 0.25),
         rng.uniform(-0.5, 0.95))
        for _ in range(count)
    ]


class TestMonotonicity:
    @pytest.mark.parametrize("cfg", _cfgs(1))
    def test_strict_in_delta(self, cfg):
        n, b, sa, sb, rr = cfg
        ps = [pfc_segmentation(S(n, b + d, b, sa, sb), r(rr)).probability for d in (0, 0.002, 0.01, 0.03, 0.1)]
        assert all(p2 < p1 for p1, p2 in zip(ps, ps[1:]) if p1 > 1e-300)

    @pytest.mark.parametrize("cfg", _cfgs(2))
    def test_strict_in_n(self, cfg):
        n, b, sa, sb, rr = cfg
        ps = [pfc_segmentation(S(m, b + 0.01, b, sa, sb), r(rr)).probability for m in (n, 2 * n, 5 * n)]
        assert ps[0] > ps[1] > ps[2]

    @pytest.mark.parametrize("cfg", _cfgs(3))
    def test_strict_in_r_equal_sds(self, cfg):
        n, b, sa, _, _ = cfg
        ps = [pfc_segmentation(S(n, b + 0.01, b, sa, sa), r(v)).probability for v in (-0.5, 0.0, 0.44, 0.67, 0.82)]
        assert all(p2 < p1 for p1, p2 in zip(ps, ps[1:]))

    @pytest.mark.parametrize("cfg", _cfgs(4))
    def test_sd_variant_order(self, cfg):
        n, b, _, _, rr = cfg
        cmp = S(n, b + 0.02, b)
        p = {v: pfc_segmentation(cmp, r(rr), f"imputed-{v}").probability for v in ("q1", "point", "q3")}
        assert p["q1"] <= p["point"] <= p["q3"]
