"""Test-set size planning: probability grids and minimum-size search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from html import escape
from typing import Callable, Mapping, Sequence

from .classification import ClassificationComparison, clamp_congruence, pfc_classification
from .kernels import RngStream
from .segmentation import (
    DEFAULT_IMPUTATION,
    DegenerateError,
    SdImputationModel,
    SegmentationComparison,
    impute_sd,
    pfc_segmentation,
)
from .types import PRESET_NAMES, TASKS, CongruenceAssumption, preset

DEFAULT_BASE = {"classification": 0.80, "segmentation": 0.80}
DEFAULT_N_CAP = 10_000_000
BAND_COLORS = {"red": "#d73027", "orange": "#fc8d59", "green": "#1a9850"}


def band(probability: float) -> str:
    """Traffic-light band: red above 10 %, orange above 5 %, green otherwise."""
    if probability > 0.10:
        return "red"
    if probability > 0.05:
        return "orange"
    return "green"


@dataclass(frozen=True)
class GridCell:
    n: int
    delta: float
    probabilities: Mapping[str, float]
    infeasible: bool = False
    flags: tuple[str, ...] = ()

    @property
    def band(self) -> str:
        return band(self.probabilities["median"])


@dataclass
class PlanningGrid:
    task: str
    n_values: tuple[int, ...]
    delta_values: tuple[float, ...]
    base_performance: float
    cells: list[list[GridCell]] = field(default_factory=list)  # [delta index][n index]

    def cell(self, n: int, delta: float) -> GridCell:
        return self.cells[self.delta_values.index(delta)][self.n_values.index(n)]

    def long_rows(self) -> list[tuple[int, float, str, float, str, str]]:
        rows = []
        for row in self.cells:
            for c in row:
                flag = ";".join(c.flags)
                for name in PRESET_NAMES:
                    if name in c.probabilities:
                        rows.append((c.n, c.delta, name, c.probabilities[name], c.band, flag))
        return rows


def _sds_for(base: float, delta: float, model: SdImputationModel, variant: str) -> tuple[float, float, list[str]]:
    flags = []
    out = []
    for mean in (base + delta, base):
        try:
            out.append(impute_sd(mean, model, variant))  # type: ignore[arg-type]
        except DegenerateError:
            out.append(0.0)
            flags.append("sd-boundary")
    return out[0], out[1], flags


def _check_levels(base: float, deltas: Sequence[float]) -> None:
    for d in deltas:
        if d < 0 or not 0.0 <= base <= 1.0 or base + d > 1.0 + 1e-12:
            raise ValueError(f"base {base} with delta {d} leaves the metric range [0, 1]")


def pfc_at(
    task: str,
    n: int,
    delta: float,
    base: float,
    congruence: CongruenceAssumption,
    *,
    k: int = 200_000,
    seed: int = 42,
    sds: tuple[float, float] | None = None,
    impute_variant: str = "point",
    model: SdImputationModel = DEFAULT_IMPUTATION,
) -> tuple[float, bool, tuple[str, ...]]:
    """Probability for one (n, delta) cell; returns ``(p, infeasible, flags)``.

    The runner-up sits at ``base`` and the winner at ``base + delta``.
    """
    top = min(1.0, base + delta)
    if task == "classification":
        cmp = ClassificationComparison(n, top, base)
        used = clamp_congruence(cmp, congruence)
        est = pfc_classification(cmp, used, k, RngStream(seed))
        return est.probability, False, ("clamped",) if used.clamped else ()
    if task == "segmentation":
        flags: list[str] = []
        if sds is None:
            sd_a, sd_b, flags = _sds_for(base, delta, model, impute_variant)
        else:
            sd_a, sd_b = sds
        est = pfc_segmentation(SegmentationComparison(n, top, base, sd_a, sd_b), congruence, "reported")
        if est.degenerate:
            flags.append("degenerate")
        return est.probability, est.degenerate and delta > 0, tuple(flags)
    raise ValueError(f"unknown task {task!r}")


def build_grid(
    task: str,
    n_values: Sequence[int],
    delta_values: Sequence[float],
    base_performance: float | None = None,
    presets: Mapping[str, CongruenceAssumption] | None = None,
    k: int = 200_000,
    seed: int = 42,
    *,
    sds: tuple[float, float] | None = None,
    impute_variant: str = "point",
    model: SdImputationModel = DEFAULT_IMPUTATION,
    workers: int = 1,
) -> PlanningGrid:
    """Probability of false claims over test-set sizes and metric deltas.

    Each cell holds one probability per congruence preset (q1, median, q3 by
    default).  Every cell uses the same random stream, which keeps Monte Carlo
    cells comparable along rows and columns.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    base = DEFAULT_BASE[task] if base_performance is None else float(base_performance)
    ns = tuple(int(n) for n in n_values)
    ds = tuple(float(d) for d in delta_values)
    if list(ns) != sorted(set(ns)) or list(ds) != sorted(set(ds)):
        raise ValueError("n_values and delta_values must be strictly ascending")
    min_n = 1 if task == "classification" else 2
    if ns and ns[0] < min_n:
        raise ValueError(f"{task} grids need n >= {min_n}")
    _check_levels(base, ds)
    congruences = dict(presets) if presets is not None else {p: preset(task, p) for p in PRESET_NAMES}
    if "median" not in congruences:
        raise ValueError("grid presets must include 'median' (used for banding)")

    def run(idx: tuple[int, int]) -> GridCell:
        i, j = idx
        n, d = ns[j], ds[i]
        probs: dict[str, float] = {}
        infeasible = False
        flags: list[str] = []
        for name, c in congruences.items():
            p, bad, fl = pfc_at(task, n, d, base, c, k=k, seed=seed, sds=sds, impute_variant=impute_variant, model=model)
            probs[name] = p
            infeasible = infeasible or bad
            flags.extend(f"{name}:{f}" for f in fl)
        if infeasible:
            flags.append("infeasible")
        return GridCell(n, d, probs, infeasible, tuple(flags))

    indices = [(i, j) for i in range(len(ds)) for j in range(len(ns))]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(run, indices))
    else:
        flat = [run(ix) for ix in indices]
    cells = [flat[i * len(ns):(i + 1) * len(ns)] for i in range(len(ds))]
    return PlanningGrid(task, ns, ds, base, cells)


@dataclass(frozen=True)
class RequiredN:
    n: int | None
    status: str  # "ok" or "exceeds-cap"
    probability: float
    k: int | None
    evaluations: int


def mc_draws_for_target(target: float, k: int) -> int:
    """Smallest draw count (at least ``k``) with 3 standard errors below 10 % of ``target``."""
    need = math.ceil(9.0 * target * (1.0 - target) / (0.1 * target) ** 2)
    return max(int(k), need)


def _search(pfc: Callable[[int], float], target: float, n_min: int, n_cap: int) -> tuple[int | None, float, int]:
    evals = 0

    def f(n: int) -> float:
        nonlocal evals
        evals += 1
        return pfc(n)

    p = f(n_min)
    if p <= target:
        return n_min, p, evals
    lo, hi = n_min, n_min
    while True:
        lo, hi = hi, min(hi * 2, n_cap)
        p_hi = f(hi)
        if p_hi <= target:
            break
        if hi >= n_cap:
            return None, p_hi, evals
    while hi - lo > 1:
        mid = (lo + hi) // 2
        p_mid = f(mid)
        if p_mid <= target:
            hi, p_hi = mid, p_mid
        else:
            lo = mid
    return hi, p_hi, evals


def required_n(
    task: str,
    delta: float,
    base_performance: float | None = None,
    congruence: CongruenceAssumption | None = None,
    target_pfc: float = 0.05,
    k: int = 200_000,
    seed: int = 42,
    *,
    sds: tuple[float, float] | None = None,
    impute_variant: str = "point",
    model: SdImputationModel = DEFAULT_IMPUTATION,
    n_cap: int = DEFAULT_N_CAP,
) -> RequiredN:
    """Smallest test-set size whose false-claim probability is at most ``target_pfc``.

    Brackets by doubling, then bisects.  Monte Carlo probes all reuse one
    random stream and at least :func:`mc_draws_for_target` draws.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    if not delta > 0:
        raise ValueError("required_n needs a positive delta")
    if not 0.0 < target_pfc < 0.5:
        raise ValueError("target_pfc must lie in (0, 0.5)")
    base = DEFAULT_BASE[task] if base_performance is None else float(base_performance)
    _check_levels(base, [delta])
    c = congruence if congruence is not None else preset(task, "median")
    kk = mc_draws_for_target(target_pfc, k) if task == "classification" else None

    def pfc(n: int) -> float:
        return pfc_at(task, n, delta, base, c, k=kk or 1, seed=seed, sds=sds, impute_variant=impute_variant, model=model)[0]

    n_min = 1 if task == "classification" else 2
    n, p, evals = _search(pfc, target_pfc, n_min, int(n_cap))
    return RequiredN(n, "ok" if n is not None else "exceeds-cap", p, kk, evals)


def grid_svg(grid: PlanningGrid, metadata: str = "") -> str:
    """Standalone SVG heatmap: one coloured cell per (delta, n), median with (q1, q3)."""
    cw, ch = 120, 44
    left, top = 90, 50
    width = left + cw * len(grid.n_values) + 20
    height = top + ch * len(grid.delta_values) + 40
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
    ]
    if metadata:
        out.append(f"<metadata>{escape(metadata)}</metadata>")
    out.append(
        f'<text x="{width / 2:g}" y="18" text-anchor="middle" font-size="14">'
        f"{escape(grid.task)}: probability of false claims (base {grid.base_performance:g})</text>"
    )
    out.append(f'<text x="{left + cw * len(grid.n_values) / 2:g}" y="{height - 8}" text-anchor="middle">test set size</text>')
    for j, n in enumerate(grid.n_values):
        out.append(f'<text x="{left + cw * j + cw / 2:g}" y="{top - 8}" text-anchor="middle">{n}</text>')
    for i, d in enumerate(grid.delta_values):
        y = top + ch * i
        out.append(f'<text x="{left - 8}" y="{y + ch / 2 + 4:g}" text-anchor="end">&#916;={d:g}</text>')
        for j, c in enumerate(grid.cells[i]):
            x = left + cw * j
            out.append(
                f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{BAND_COLORS[c.band]}" '
                f'stroke="#ffffff" data-band="{c.band}" data-n="{c.n}" data-delta="{c.delta!r}"/>'
            )
            p = c.probabilities
            label = f"{p['median']:.3f}"
            sub = f"({p['q1']:.3f}, {p['q3']:.3f})" if "q1" in p and "q3" in p else ""
            if c.infeasible:
                sub = "infeasible"
            out.append(f'<text x="{x + cw / 2:g}" y="{y + 18}" text-anchor="middle">{label}</text>')
            if sub:
                out.append(f'<text x="{x + cw / 2:g}" y="{y + 34}" text-anchor="middle" font-size="10">{sub}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
