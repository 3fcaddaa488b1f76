"""Numerical kernels: log-gamma, incomplete beta, Student-t CDF and seeded samplers.

Random draws go through :class:`RngStream`, a ``(seed, stream_id)`` pair that
maps onto a numpy ``SeedSequence`` spawn key.  Large draw counts are split into
fixed-size chunks, each with its own child sequence, so a result never depends
on how many workers evaluated the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

_MASK64 = (1 << 64) - 1

# Draws per chunk for sharded Monte Carlo.  Changing this changes every
# seeded result, so it is part of the reproducibility contract.
CHUNK_SIZE = 50_000

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 200_000


class DomainError(ValueError):
    """Argument outside the mathematical domain of a kernel."""


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``."""

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def _sequence(self, *extra: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), *extra))

    def generator(self, chunk: int | None = None) -> np.random.Generator:
        """PCG64 generator for the whole stream, or for one numbered chunk of it."""
        seq = self._sequence() if chunk is None else self._sequence(0xC4A7, int(chunk))
        return np.random.Generator(np.random.PCG64(seq))

    def substream(self, index: int) -> "RngStream":
        """Derive an independent stream, e.g. one per corpus worker."""
        mixed = (int(self.stream_id) * 0x9E3779B97F4A7C15 + int(index) + 1) & _MASK64
        return RngStream(self.seed, mixed)


@dataclass(frozen=True)
class DirichletParams:
    alphas: tuple[float, ...]

    def __post_init__(self) -> None:
        alphas = tuple(float(a) for a in self.alphas)
        if len(alphas) < 2:
            raise DomainError("Dirichlet needs at least two concentration parameters")
        if not all(math.isfinite(a) and a > 0 for a in alphas):
            raise DomainError(f"Dirichlet parameters must be positive and finite, got {alphas}")
        object.__setattr__(self, "alphas", alphas)

    @property
    def mean(self) -> np.ndarray:
        a = np.asarray(self.alphas)
        return a / a.sum()


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------


def ln_gamma(z: float) -> float:
    """Natural log of the gamma function for ``z > 0``."""
    z = float(z)
    if not z > 0 or not math.isfinite(z):
        raise DomainError(f"ln_gamma requires a positive finite argument, got {z}")
    return math.lgamma(z)


def ln_beta(a: float, b: float) -> float:
    return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b) (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _inc_beta(x: float, y: float, a: float, b: float) -> float:
    """I_x(a, b) given both ``x`` and ``y = 1 - x`` computed by the caller.

    Passing ``y`` separately keeps full precision when ``x`` is close to 1.
    """
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log(y) - ln_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _beta_cf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _beta_cf(b, a, y) / b


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    x, a, b = float(x), float(a), float(b)
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"reg_inc_beta requires 0 <= x <= 1, got x={x}")
    if not (a > 0 and b > 0) or not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"reg_inc_beta requires a, b > 0, got a={a}, b={b}")
    return min(1.0, max(0.0, _inc_beta(x, 1.0 - x, a, b)))


def student_t_cdf(z: float, dof: float) -> float:
    """CDF of the standard Student-t distribution with ``dof`` degrees of freedom.

    Uses ``P(T <= -|z|) = I_{dof/(dof+z^2)}(dof/2, 1/2) / 2`` and reflects for
    positive ``z``, so both tails keep relative accuracy.
    """
    z, dof = float(z), float(dof)
    if not dof >= 1 or not math.isfinite(dof):
        raise DomainError(f"student_t_cdf requires dof >= 1, got {dof}")
    if math.isnan(z):
        raise DomainError("student_t_cdf argument is NaN")
    if z == 0.0:
        return 0.5
    if math.isinf(z):
        return 0.0 if z < 0 else 1.0
    z2 = z * z
    denom = dof + z2
    tail = 0.5 * _inc_beta(dof / denom, z2 / denom, 0.5 * dof, 0.5)
    return tail if z < 0 else 1.0 - tail


def student_t_pdf(z: float, dof: float) -> float:
    log_norm = ln_gamma((dof + 1) / 2) - ln_gamma(dof / 2) - 0.5 * math.log(dof * math.pi)
    return math.exp(log_norm - (dof + 1) / 2 * math.log1p(z * z / dof))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_gamma(shape: float | np.ndarray, size: int | tuple[int, ...], gen: np.random.Generator) -> np.ndarray:
    """Unit-scale Gamma draws."""
    if np.any(np.asarray(shape) <= 0):
        raise DomainError("gamma shape must be positive")
    return gen.standard_gamma(shape, size=size)


def _dirichlet_block(alphas: np.ndarray, size: int, gen: np.random.Generator) -> np.ndarray:
    g = np.empty((size, alphas.size))
    for j, a in enumerate(alphas):
        g[:, j] = gen.standard_gamma(a, size=size)
    return g / g.sum(axis=1, keepdims=True)


def sample_dirichlet(params: DirichletParams, rng: RngStream, size: int = 1) -> np.ndarray:
    """Draw ``size`` Dirichlet vectors as normalized independent Gamma variates.

    Returns an array of shape ``(size, len(alphas))``.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    alphas = np.asarray(params.alphas)
    return np.concatenate(
        [_dirichlet_block(alphas, m, rng.generator(i)) for i, m in enumerate(chunk_sizes(size))]
    )


def chunk_sizes(total: int, chunk: int = CHUNK_SIZE) -> list[int]:
    full, rest = divmod(int(total), chunk)
    return [chunk] * full + ([rest] if rest else [])


def sharded_count(
    total: int,
    rng: RngStream,
    count_chunk: Callable[[int, np.random.Generator], int],
    workers: int = 1,
) -> int:
    """Sum ``count_chunk(size, generator)`` over the fixed chunks of ``total`` draws.

    Each chunk gets its own generator, so the sum is identical for any
    ``workers`` value.
    """
    sizes = chunk_sizes(total)

    def run(i: int) -> int:
        return int(count_chunk(sizes[i], rng.generator(i)))

    if workers <= 1 or len(sizes) == 1:
        return sum(run(i) for i in range(len(sizes)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(run, range(len(sizes))))


def type7_quantiles(values: Sequence[float], probs: Sequence[float]) -> tuple[float, ...]:
    """Quantiles by linear interpolation between order statistics."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("quantiles of an empty sample are undefined")
    return tuple(float(q) for q in np.quantile(arr, probs, method="linear"))
