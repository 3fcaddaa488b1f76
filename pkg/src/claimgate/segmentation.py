"""False-claim probability for mean-DSC comparisons.

Per-image DSC pairs are modelled as jointly normal.  Under the usual
non-informative prior on the mean and variance of the paired difference, the
posterior of the mean difference is a scaled Student-t with ``n - 1`` degrees
of freedom, which gives the closed form

    P = t_{n-1}( sqrt(n) (dsc_b - dsc_a) / sqrt(sd_a^2 + sd_b^2 - 2 sd_a sd_b r) ).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .kernels import RngStream, sharded_count, student_t_cdf
from .types import CongruenceAssumption, InvariantError, PfcEstimate

SdSource = Literal["reported", "imputed-point", "imputed-q1", "imputed-q3"]
SD_SOURCES: tuple[str, ...] = ("reported", "imputed-point", "imputed-q1", "imputed-q3")
Variant = Literal["point", "q1", "q3"]


class DegenerateError(ValueError):
    """Input sits on a zero-variance boundary where the quantity is undefined."""


@dataclass(frozen=True)
class SegmentationComparison:
    """Reported mean DSCs (unit scale) with optional per-image SDs."""

    n: int
    dsc_a: float
    dsc_b: float
    sd_a: float | None = None
    sd_b: float | None = None

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise ValueError(f"test-set size must be an integer >= 2, got {self.n!r}")
        for name in ("dsc_a", "dsc_b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be a unit-scale DSC in [0, 1], got {v}")
        if self.dsc_b > self.dsc_a:
            raise ValueError(
                f"rank-order violation: dsc_b={self.dsc_b} exceeds dsc_a={self.dsc_a}; "
                "method A must be the reported winner"
            )
        for name in ("sd_a", "sd_b"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be a non-negative SD, got {v}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def delta(self) -> float:
        return self.dsc_a - self.dsc_b


@dataclass(frozen=True)
class SdImputationModel:
    """Imputes a per-image DSC SD from the mean as ``coef * sqrt(mean (1 - mean))``.

    ``pi_quartiles`` holds multipliers of the point value giving the lower and
    upper quartile of the prediction interval.  ``kind="user-table"`` replaces
    the formula by linear interpolation in ``table`` (pairs of mean, SD).
    """

    kind: Literal["parametric-default", "user-table"] = "parametric-default"
    coef: float = 0.4
    pi_quartiles: tuple[float, float] = (0.7, 1.3)
    table: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self) -> None:
        lo, hi = self.pi_quartiles
        if not 0 < lo <= 1.0 <= hi:
            raise ValueError(f"prediction-interval multipliers must satisfy 0 < q1 <= 1 <= q3, got {self.pi_quartiles}")
        if self.kind == "parametric-default" and not self.coef > 0:
            raise ValueError("imputation coefficient must be positive")
        if self.kind == "user-table":
            if len(self.table) < 2:
                raise ValueError("user-table imputation needs at least two (mean, sd) rows")
            means = [m for m, _ in self.table]
            if means != sorted(means) or len(set(means)) != len(means):
                raise ValueError("user-table means must be strictly increasing")
            if any(s <= 0 for _, s in self.table):
                raise ValueError("user-table SDs must be positive")


DEFAULT_IMPUTATION = SdImputationModel()


def impute_sd(mean_dsc: float, model: SdImputationModel = DEFAULT_IMPUTATION, variant: Variant = "point") -> float:
    if not 0.0 < mean_dsc < 1.0:
        if mean_dsc in (0.0, 1.0):
            raise DegenerateError(f"cannot impute an SD at mean DSC {mean_dsc} (zero-variance boundary)")
        raise ValueError(f"mean DSC must lie in (0, 1), got {mean_dsc}")
    if model.kind == "user-table":
        means, sds = zip(*model.table)
        point = float(np.interp(mean_dsc, means, sds))
    else:
        point = model.coef * math.sqrt(mean_dsc * (1.0 - mean_dsc))
    if variant == "point":
        return point
    if variant == "q1":
        return point * model.pi_quartiles[0]
    if variant == "q3":
        return point * model.pi_quartiles[1]
    raise ValueError(f"unknown imputation variant {variant!r}")


def resolve_sds(
    cmp: SegmentationComparison, sd_source: SdSource, model: SdImputationModel = DEFAULT_IMPUTATION
) -> tuple[float, float, bool]:
    """Pick the SDs to use; returns ``(sd_a, sd_b, any_imputed)``.

    ``"reported"`` requires both SDs.  The ``imputed-*`` sources keep any
    reported SD and impute only the missing ones with the chosen variant.
    """
    if sd_source == "reported":
        if cmp.sd_a is None or cmp.sd_b is None:
            raise ValueError("sd_source='reported' but the comparison lacks a reported SD")
        return cmp.sd_a, cmp.sd_b, False
    if sd_source not in SD_SOURCES:
        raise ValueError(f"unknown sd_source {sd_source!r}; expected one of {SD_SOURCES}")
    variant = sd_source.split("-", 1)[1]
    sd_a = cmp.sd_a if cmp.sd_a is not None else impute_sd(cmp.dsc_a, model, variant)  # type: ignore[arg-type]
    sd_b = cmp.sd_b if cmp.sd_b is not None else impute_sd(cmp.dsc_b, model, variant)  # type: ignore[arg-type]
    return sd_a, sd_b, cmp.sd_a is None or cmp.sd_b is None


def _diff_sd(sd_a: float, sd_b: float, r: float) -> float:
    var = sd_a * sd_a + sd_b * sd_b - 2.0 * sd_a * sd_b * r
    scale = sd_a * sd_a + sd_b * sd_b
    if var < -1e-12 * max(scale, 1e-300):
        raise InvariantError(f"negative difference variance {var} with r={r}")
    if var <= 1e-14 * scale:
        return 0.0
    return math.sqrt(var)


def _check_r(r_ab: CongruenceAssumption) -> float:
    r = r_ab.value
    if not -1.0 < r <= 1.0:
        raise ValueError(f"DSC correlation must lie in (-1, 1], got {r}")
    return r


def pfc_segmentation(
    cmp: SegmentationComparison,
    r_ab: CongruenceAssumption,
    sd_source: SdSource = "reported",
    model: SdImputationModel = DEFAULT_IMPUTATION,
) -> PfcEstimate:
    r = _check_r(r_ab)
    sd_a, sd_b, _ = resolve_sds(cmp, sd_source, model)
    diff_sd = _diff_sd(sd_a, sd_b, r)
    if diff_sd == 0.0:
        p = 0.5 if cmp.dsc_a == cmp.dsc_b else 0.0
        return PfcEstimate(p, "closed-form", r_ab, degenerate=True)
    z = math.sqrt(cmp.n) * (cmp.dsc_b - cmp.dsc_a) / diff_sd
    return PfcEstimate(student_t_cdf(z, cmp.n - 1), "closed-form", r_ab)


def pfc_segmentation_mc_check(
    cmp: SegmentationComparison,
    r_ab: CongruenceAssumption,
    sds: tuple[float, float] | None = None,
    k: int = 200_000,
    rng: RngStream | None = None,
    *,
    workers: int = 1,
) -> PfcEstimate:
    """Monte Carlo version of :func:`pfc_segmentation` that never touches the t CDF.

    Draws the posterior of the paired-difference mean by composition:
    ``sigma^2 = (n - 1) s^2 / chi2_{n-1}`` then ``mu ~ N(xbar, sigma^2 / n)``,
    and counts how often ``mu <= 0``.  ``sds`` defaults to the reported SDs.
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValueError(f"draw count k must be a positive integer, got {k!r}")
    k = int(k)
    r = _check_r(r_ab)
    if sds is None:
        sd_a, sd_b, _ = resolve_sds(cmp, "reported")
    else:
        sd_a, sd_b = sds
    s = _diff_sd(sd_a, sd_b, r)
    if s == 0.0:
        p = 0.5 if cmp.dsc_a == cmp.dsc_b else 0.0
        return PfcEstimate(p, "monte-carlo", r_ab, k=k, std_err=0.0, degenerate=True)
    rng = rng if rng is not None else RngStream(42)
    n = cmp.n
    xbar = cmp.dsc_a - cmp.dsc_b

    def count(size: int, gen: np.random.Generator) -> int:
        chi2 = 2.0 * gen.standard_gamma(0.5 * (n - 1), size=size)
        sigma = np.sqrt((n - 1) * s * s / chi2)
        mu = xbar + sigma / math.sqrt(n) * gen.standard_normal(size)
        return int(np.count_nonzero(mu <= 0.0))

    m = sharded_count(k, rng, count, workers=workers)
    p = m / k
    return PfcEstimate(p, "monte-carlo", r_ab, k=k, std_err=math.sqrt(p * (1.0 - p) / k))
