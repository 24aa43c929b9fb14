"""Core energy metrics, the A-G efficiency scale, and global-impact math.

All energies are in kWh. Normalized ad energy is the dimensionless ratio
(ad_rendering_energy - baseline_energy) / baseline_energy, which removes
most of the hardware dependence and is the quantity the estimator predicts
and the label bins classify.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from .errors import DomainError

#: Lower edges of the seven label bins over normalized ad energy.
LABEL_BIN_EDGES: tuple[float, ...] = (0.0, 1.0, 3.0, 6.0, 10.0, 15.0, 25.0)
GRADES: tuple[str, ...] = ("A", "B", "C", "D", "E", "F", "G")
DAYS_PER_YEAR = 365


@dataclass(frozen=True)
class EnergyMeasurement:
    """One lab sample pairing baseline and ad-rendering energy in kWh."""

    ad_id: str
    device_id: str
    sample_index: int
    baseline_energy: float
    ad_rendering_energy: float

    def __post_init__(self):
        if not isinstance(self.sample_index, int) or self.sample_index < 1:
            raise DomainError(f"sample_index must be a positive integer, got {self.sample_index!r}")
        if not math.isfinite(self.baseline_energy) or self.baseline_energy <= 0:
            raise DomainError(f"baseline_energy must be finite and > 0, got {self.baseline_energy!r}")
        if not math.isfinite(self.ad_rendering_energy) or self.ad_rendering_energy < 0:
            raise DomainError(
                f"ad_rendering_energy must be finite and >= 0, got {self.ad_rendering_energy!r}"
            )

    def normalized_ad_energy(self) -> float:
        return normalized_ad_energy(self.ad_rendering_energy, self.baseline_energy)


@dataclass(frozen=True)
class EnergyLabel:
    """An A-G grade together with the half-open bin [bin_lower, bin_upper)."""

    grade: str
    bin_lower: float
    bin_upper: float  # math.inf for the top bin


#: The seven labels in grade order; bins are contiguous and cover [0, inf).
LABEL_BINS: tuple[EnergyLabel, ...] = tuple(
    EnergyLabel(
        grade=GRADES[i],
        bin_lower=LABEL_BIN_EDGES[i],
        bin_upper=LABEL_BIN_EDGES[i + 1] if i + 1 < len(LABEL_BIN_EDGES) else math.inf,
    )
    for i in range(len(LABEL_BIN_EDGES))
)


@dataclass(frozen=True)
class ImpactAssumptions:
    per_ad_energy: float
    ads_per_user_per_day: int
    user_count: int


@dataclass(frozen=True)
class ImpactEstimate:
    """Daily and yearly energy consumption projected from per-ad energy."""

    per_user_daily: float
    global_daily: float
    global_yearly: float
    assumptions: ImpactAssumptions


def _require_finite(name: str, value: float) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(f"{name} must be numeric, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


def ad_energy(ad_rendering_energy: float, baseline_energy: float) -> float:
    """Energy attributable to the ad: rendering energy minus baseline.

    May be negative when measurement noise puts the rendering sample below
    the baseline sample.
    """
    rendering = _require_finite("ad_rendering_energy", ad_rendering_energy)
    baseline = _require_finite("baseline_energy", baseline_energy)
    if baseline <= 0:
        raise DomainError(f"baseline_energy must be > 0, got {baseline!r}")
    return rendering - baseline


def normalized_ad_energy(ad_rendering_energy: float, baseline_energy: float) -> float:
    """Ad energy expressed relative to the baseline consumption.

    Dimensionless; always >= -1 because rendering energy is non-negative.
    """
    rendering = _require_finite("ad_rendering_energy", ad_rendering_energy)
    baseline = _require_finite("baseline_energy", baseline_energy)
    if baseline <= 0:
        raise DomainError(f"baseline_energy must be > 0, got {baseline!r}")
    if rendering < 0:
        raise DomainError(f"ad_rendering_energy must be >= 0, got {rendering!r}")
    return (rendering - baseline) / baseline


def assign_label(
    nead: float, bin_edges: tuple[float, ...] = LABEL_BIN_EDGES
) -> EnergyLabel:
    """Grade a normalized ad energy value on the A-G scale.

    Bins are half-open: a value on a boundary belongs to the upper bin.
    Negative values (measurement noise) clamp to grade A.
    """
    value = _require_finite("normalized ad energy", nead)
    if bin_edges is not LABEL_BIN_EDGES:
        bin_edges = _validated_edges(bin_edges)
    index = bisect_right(bin_edges, max(value, 0.0)) - 1
    upper = bin_edges[index + 1] if index + 1 < len(bin_edges) else math.inf
    return EnergyLabel(grade=GRADES[index], bin_lower=bin_edges[index], bin_upper=upper)


def _validated_edges(edges) -> tuple[float, ...]:
    edges = tuple(float(e) for e in edges)
    if len(edges) != len(GRADES):
        raise DomainError(f"expected {len(GRADES)} bin edges, got {len(edges)}")
    if edges[0] != 0.0 or any(a >= b for a, b in zip(edges, edges[1:])):
        raise DomainError(f"bin edges must start at 0 and increase, got {edges!r}")
    return edges


def global_impact(
    per_ad_energy: float, ads_per_user_per_day: int, user_count: int
) -> ImpactEstimate:
    """Scale a per-ad energy figure to per-user, global-daily, and yearly totals."""
    per_ad = _require_finite("per_ad_energy", per_ad_energy)
    if per_ad <= 0:
        raise DomainError(f"per_ad_energy must be > 0, got {per_ad!r}")
    for name, count in (
        ("ads_per_user_per_day", ads_per_user_per_day),
        ("user_count", user_count),
    ):
        if isinstance(count, bool) or not isinstance(count, int):
            raise DomainError(f"{name} must be an integer, got {count!r}")
        if count <= 0:
            raise DomainError(f"{name} must be > 0, got {count!r}")
    per_user_daily = per_ad * ads_per_user_per_day
    global_daily = per_user_daily * user_count
    return ImpactEstimate(
        per_user_daily=per_user_daily,
        global_daily=global_daily,
        global_yearly=global_daily * DAYS_PER_YEAR,
        assumptions=ImpactAssumptions(per_ad, ads_per_user_per_day, user_count),
    )
