"""False-claim probability for Accuracy comparisons.

The two classifiers' per-image outcomes form a 2x2 agreement table.  With a
flat Dirichlet prior, the posterior of the two discordant cell probabilities
``(p1, p2)`` is Dirichlet(x1 + 1, x2 + 1, n - x1 - x2 + 2), where
``x1 = n (acc_a - p11)`` and ``x2 = n (acc_b - p11)`` and ``p11`` is the
assumed joint-correct proportion.  The false-claim probability is
``P(p1 <= p2)`` under that posterior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import DirichletParams, RngStream, _dirichlet_block, reg_inc_beta, sharded_count
from .types import CongruenceAssumption, InvariantError, PfcEstimate

DEFAULT_K = 200_000
ORACLE_MAX_N = 2000
_BOUND_TOL = 1e-12


@dataclass(frozen=True)
class ClassificationComparison:
    """Reported accuracies of the winner (``acc_a``) and runner-up (``acc_b``)."""

    n: int
    acc_a: float
    acc_b: float

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"test-set size must be a positive integer, got {self.n!r}")
        for name in ("acc_a", "acc_b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be an accuracy in [0, 1], got {v}")
        if self.acc_b > self.acc_a:
            raise ValueError(
                f"rank-order violation: acc_b={self.acc_b} exceeds acc_a={self.acc_a}; "
                "method A must be the reported winner"
            )
        object.__setattr__(self, "n", int(self.n))

    @property
    def delta(self) -> float:
        return self.acc_a - self.acc_b


def congruence_bounds(cmp: ClassificationComparison) -> tuple[float, float]:
    """Feasible range of the joint-correct proportion for the reported accuracies."""
    lower = max(0.0, cmp.acc_a + cmp.acc_b - 1.0)
    upper = min(cmp.acc_a, cmp.acc_b)
    if lower > upper:
        # only reachable through rounding with accuracies summing to ~2
        lower = upper
    return lower, upper


def clamp_congruence(cmp: ClassificationComparison, assumed: CongruenceAssumption) -> CongruenceAssumption:
    """Move an infeasible congruence onto the nearest bound.

    An exact midpoint tie goes to the lower bound.
    """
    if not 0.0 <= assumed.value <= 1.0:
        raise ValueError(f"classification congruence must lie in [0, 1], got {assumed.value}")
    lower, upper = congruence_bounds(cmp)
    v = assumed.value
    if lower <= v <= upper:
        return assumed
    nearest = lower if abs(v - lower) <= abs(v - upper) else upper
    return assumed.with_value(nearest, clamped=True)


def dirichlet_params(
    cmp: ClassificationComparison, p11: float, round_counts: bool = False
) -> DirichletParams:
    """Posterior concentration ``(x1 + 1, x2 + 1, n - x1 - x2 + 2)``."""
    lower, upper = congruence_bounds(cmp)
    if not lower - _BOUND_TOL <= p11 <= upper + _BOUND_TOL:
        raise ValueError(
            f"congruence {p11} outside feasible bounds [{lower}, {upper}]; clamp it first"
        )
    n = cmp.n
    x1 = n * (cmp.acc_a - p11)
    x2 = n * (cmp.acc_b - p11)
    if round_counts:
        x1, x2 = float(round(x1)), float(round(x2))
    if x1 < -1e-9 * n or x2 < -1e-9 * n:
        raise InvariantError(f"negative discordant count (x1={x1}, x2={x2}) after clamping")
    x1, x2 = max(x1, 0.0), max(x2, 0.0)
    return DirichletParams((x1 + 1.0, x2 + 1.0, n - x1 - x2 + 2.0))


def pfc_classification(
    cmp: ClassificationComparison,
    assumed: CongruenceAssumption,
    k: int = DEFAULT_K,
    rng: RngStream | None = None,
    *,
    round_counts: bool = False,
    workers: int = 1,
) -> PfcEstimate:
    """Monte Carlo estimate ``M / k`` of ``P(p1 <= p2)``.

    ``assumed`` must already lie inside :func:`congruence_bounds`; use
    :func:`clamp_congruence` first.
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValueError(f"draw count k must be a positive integer, got {k!r}")
    k = int(k)
    rng = rng if rng is not None else RngStream(42)
    alphas = np.asarray(dirichlet_params(cmp, assumed.value, round_counts).alphas)

    def count(size: int, gen: np.random.Generator) -> int:
        draws = _dirichlet_block(alphas, size, gen)
        return int(np.count_nonzero(draws[:, 0] <= draws[:, 1]))

    m = sharded_count(k, rng, count, workers=workers)
    p = m / k
    return PfcEstimate(
        probability=p,
        method="monte-carlo",
        congruence_used=assumed,
        k=k,
        std_err=math.sqrt(p * (1.0 - p) / k),
    )


def pfc_classification_exact(
    cmp: ClassificationComparison, assumed: CongruenceAssumption, *, round_counts: bool = False
) -> PfcEstimate:
    """Exact value of the same posterior probability.

    Under Dirichlet(a1, a2, a3) the ratio p1 / (p1 + p2) is Beta(a1, a2) and
    independent of the third coordinate, so ``P(p1 <= p2) = I_{1/2}(a1, a2)``.
    """
    a1, a2, _ = dirichlet_params(cmp, assumed.value, round_counts).alphas
    return PfcEstimate(reg_inc_beta(0.5, a1, a2), "closed-form", assumed)


def pfc_classification_oracle(
    cmp: ClassificationComparison,
    assumed: CongruenceAssumption,
    grid_points: int = 2001,
    *,
    round_counts: bool = False,
) -> PfcEstimate:
    """Grid-integrate the marginal posterior density of ``(p1, p2)`` over ``p1 <= p2``.

    Deterministic and O(grid_points**2); intended for checking the Monte Carlo
    estimator on small test sets.
    """
    if cmp.n > ORACLE_MAX_N:
        raise ValueError(f"grid oracle is limited to n <= {ORACLE_MAX_N}, got n={cmp.n}")
    a1, a2, a3 = dirichlet_params(cmp, assumed.value, round_counts).alphas
    total = a1 + a2 + a3

    def marginal(a: float) -> tuple[float, float]:
        mean = a / total
        return mean, math.sqrt(mean * (1.0 - mean) / (total + 1.0))

    (m1, s1), (m2, s2) = marginal(a1), marginal(a2)
    lo = max(0.0, min(m1 - 14.0 * s1, m2 - 14.0 * s2))
    hi = min(1.0, max(m1 + 14.0 * s1, m2 + 14.0 * s2))
    t = np.linspace(lo, hi, grid_points)
    h = t[1] - t[0]

    p1 = t[:, None]
    p2 = t[None, :]
    rest = 1.0 - p1 - p2
    inside = rest > 0
    # unnormalized log density; the normalizing constant cancels in the ratio
    with np.errstate(divide="ignore", invalid="ignore"):
        logf = (
            np.where(a1 == 1.0, 0.0, (a1 - 1.0) * np.log(p1))
            + np.where(a2 == 1.0, 0.0, (a2 - 1.0) * np.log(p2))
            + (a3 - 1.0) * np.log(np.where(inside, rest, 1.0))
        )
    logf = np.where(inside & np.isfinite(logf), logf, -np.inf)
    peak = logf.max()
    if not np.isfinite(peak):
        raise InvariantError("grid oracle captured no posterior mass")
    f = np.exp(logf - peak)

    # inner integral over p1 in [lo, p2] via cumulative trapezoid, ending on the diagonal
    cum = np.zeros_like(f)
    cum[1:, :] = np.cumsum(0.5 * h * (f[1:, :] + f[:-1, :]), axis=0)
    inner_below = np.diagonal(cum).copy()
    inner_full = cum[-1, :]
    w = np.full(grid_points, h)
    w[0] = w[-1] = 0.5 * h
    below = float(w @ inner_below)
    mass = float(w @ inner_full)
    if not mass > 0:
        raise InvariantError("grid oracle captured no posterior mass")
    return PfcEstimate(min(1.0, below / mass), "grid-oracle", assumed)
