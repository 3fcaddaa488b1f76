"""Shared value types: congruence assumptions, estimates and presets."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Literal

Task = Literal["classification", "segmentation"]
Provenance = Literal["preset-median", "preset-q1", "preset-q3", "user-supplied", "empirical"]
Method = Literal["monte-carlo", "closed-form", "grid-oracle"]

TASKS: tuple[str, ...] = ("classification", "segmentation")
PRESET_NAMES: tuple[str, ...] = ("q1", "median", "q3")

# Reference congruence quartiles: joint-correct proportion for Accuracy,
# Pearson correlation of per-image DSC for segmentation.
CONGRUENCE_PRESETS: dict[str, dict[str, float]] = {
    "classification": {"q1": 0.47, "median": 0.67, "q3": 0.83},
    "segmentation": {"q1": 0.44, "median": 0.67, "q3": 0.82},
}


class InvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""


@dataclass(frozen=True)
class CongruenceAssumption:
    value: float
    provenance: Provenance = "user-supplied"
    clamped: bool = False

    def __post_init__(self) -> None:
        if not math.isfinite(self.value) or not -1.0 <= self.value <= 1.0:
            raise ValueError(f"congruence must lie in [-1, 1], got {self.value}")

    def with_value(self, value: float, clamped: bool) -> "CongruenceAssumption":
        return replace(self, value=float(value), clamped=clamped)


def preset(task: str, name: str = "median") -> CongruenceAssumption:
    """Reference congruence quartile for ``task`` (``"q1"``, ``"median"`` or ``"q3"``)."""
    if task not in CONGRUENCE_PRESETS:
        raise ValueError(f"unknown task {task!r}")
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown congruence preset {name!r}; expected one of {PRESET_NAMES}")
    return CongruenceAssumption(CONGRUENCE_PRESETS[task][name], f"preset-{name}")  # type: ignore[arg-type]


def parse_congruence(task: str, value: str | float) -> CongruenceAssumption:
    """Accept a preset name or a numeric value."""
    if isinstance(value, str) and value in PRESET_NAMES:
        return preset(task, value)
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"congruence must be a number or one of {PRESET_NAMES}, got {value!r}") from None
    return CongruenceAssumption(value, "user-supplied")


@dataclass(frozen=True)
class PfcEstimate:
    """Probability that the reported runner-up is in truth at least as good."""

    probability: float
    method: Method
    congruence_used: CongruenceAssumption
    k: int | None = None
    std_err: float | None = None
    degenerate: bool = False

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["congruence_used"] = asdict(self.congruence_used)
        return d
