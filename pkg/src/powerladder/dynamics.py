"""Shares equation with grid-stability limits.

Index convention: ``freq[i, j] = K / (lifetime_i * build_time_j)`` is the
frequency at which capacity of ``i`` is retired and replaced by ``j`` (the
flow i -> j). The change of share ``i`` over ``dt`` is

    dS_i = sum_j S_i S_j (freq[j, i] F[i, j] Gmax_i Gmin_j
                          - freq[i, j] F[j, i] Gmax_j Gmin_i) dt

where ``F[i, j]`` is the probability that ``i`` undercuts ``j`` and the G
factors are investment gates near upper and lower share limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .costs import HOURS_PER_YEAR, CostDistribution, preference_matrix
from .errors import StepSizeError
from .techdata import GridClass, TechnologyRegistry

DEFAULT_SOFTNESS = 0.05
MAX_STEP_CHANGE = 0.5


def substitution_matrix(registry: TechnologyRegistry, scale: float,
                        apply_overrides: bool = True) -> np.ndarray:
    """Substitution frequencies ``freq[i, j] = scale / (lifetime_i * build_time_j)``."""
    lifetimes = registry.column("lifetime")
    build_times = registry.column("build_time")
    freq = frequency_matrix(lifetimes, build_times, scale)
    if apply_overrides:
        for ov in registry.substitution_overrides:
            freq[registry.index(ov.source), registry.index(ov.target)] = scale * ov.value
    return freq


def frequency_matrix(lifetimes, build_times, scale: float) -> np.ndarray:
    lifetimes = np.asarray(lifetimes, dtype=float)
    build_times = np.asarray(build_times, dtype=float)
    if np.any(lifetimes <= 0) or np.any(build_times <= 0):
        raise ValueError("lifetimes and build times must be > 0")
    if not scale > 0:
        raise ValueError("time scaling constant must be > 0")
    return scale / (lifetimes[:, None] * build_times[None, :])


@dataclass(frozen=True)
class GridParams:
    """Daily load and storage parameters.

    ``peak_fraction`` is the daily peak-to-trough height relative to total
    capacity; ``peak_height`` (GW) overrides it when given. ``peak_energy``
    (GWh/day above the daily mean) defaults to a sinusoidal daily profile.
    """

    peak_fraction: float = 0.3
    peak_height: float | None = None
    peak_energy: float | None = None
    storage_power: float = 0.0
    storage_energy: float = 0.0
    day_length: float = 24.0
    softness: float = DEFAULT_SOFTNESS

    def __post_init__(self):
        for name in ("peak_fraction", "storage_power", "storage_energy", "day_length"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("peak_height", "peak_energy"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.softness > 0:
            raise ValueError("softness must be > 0")

    def peak_gw(self, total_capacity: float) -> float:
        if self.peak_height is not None:
            return self.peak_height
        return self.peak_fraction * total_capacity

    def peak_energy_gwh(self, total_capacity: float) -> float:
        if self.peak_energy is not None:
            return self.peak_energy
        # area above the mean of a sinusoid with peak-to-trough height h
        return self.peak_gw(total_capacity) * self.day_length / (2.0 * math.pi)


@dataclass(frozen=True)
class CapacityStats:
    total_capacity: float
    avg_cf: float
    demand: float
    base: float
    flexible: float
    variable: float
    flexible_output: float
    variable_output: float

    @property
    def cf_flexible(self) -> float:
        return self.flexible_output / self.flexible if self.flexible > 0 else 0.0

    @property
    def cf_variable(self) -> float:
        return self.variable_output / self.variable if self.variable > 0 else 0.0


def grid_classes(source) -> tuple:
    if isinstance(source, TechnologyRegistry):
        return tuple(t.grid_class for t in source)
    return tuple(GridClass(c) for c in source)


def class_masks(classes) -> dict:
    return {g: np.array([c is g for c in classes], dtype=bool) for g in GridClass}


def capacity_stats(shares, capacity_factors, classes, demand: float) -> CapacityStats:
    """Aggregates the grid rules need; ``demand`` in GWh/y."""
    shares = np.asarray(shares, dtype=float)
    cf = np.asarray(capacity_factors, dtype=float)
    classes = grid_classes(classes)
    output = shares * cf
    avg_cf = math.fsum(output)
    total = demand / (avg_cf * HOURS_PER_YEAR) if avg_cf > 0 else 0.0
    masks = class_masks(classes)
    return CapacityStats(
        total_capacity=total,
        avg_cf=avg_cf,
        demand=demand,
        base=math.fsum(shares[masks[GridClass.BASE]]),
        flexible=math.fsum(shares[masks[GridClass.FLEXIBLE]]),
        variable=math.fsum(shares[masks[GridClass.VARIABLE]]),
        flexible_output=math.fsum(output[masks[GridClass.FLEXIBLE]]),
        variable_output=math.fsum(output[masks[GridClass.VARIABLE]]),
    )


@dataclass(frozen=True)
class ShareLimits:
    """Per-technology share limits; NaN where a technology has none.

    Values are kept unclamped because gates act on the distance to the limit;
    :meth:`clamped` gives the [0, 1] view.
    """

    upper: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        upper = np.asarray(self.upper, dtype=float)
        lower = np.asarray(self.lower, dtype=float)
        if upper.shape != lower.shape:
            raise ValueError("upper and lower limits must have the same shape")
        both = ~np.isnan(upper) & ~np.isnan(lower)
        if np.any(np.clip(lower[both], 0, 1) > np.clip(upper[both], 0, 1)):
            raise ValueError("lower limit above upper limit")
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "lower", lower)

    @classmethod
    def none(cls, n: int) -> "ShareLimits":
        return cls(np.full(n, np.nan), np.full(n, np.nan))

    @classmethod
    def fixed(cls, n: int, upper: dict | None = None, lower: dict | None = None) -> "ShareLimits":
        """Constant limits given as {index: value}."""
        up, lo = np.full(n, np.nan), np.full(n, np.nan)
        for k, v in (upper or {}).items():
            up[k] = v
        for k, v in (lower or {}).items():
            lo[k] = v
        return cls(up, lo)

    def clamped(self) -> "ShareLimits":
        return ShareLimits(np.clip(self.upper, 0, 1), np.clip(self.lower, 0, 1))


def share_limits(shares, grid: GridParams, classes, stats: CapacityStats) -> ShareLimits:
    shares = np.asarray(shares, dtype=float)
    classes = grid_classes(classes)
    if not stats.total_capacity > 0:
        raise ValueError("total capacity must be > 0")
    peak = grid.peak_gw(stats.total_capacity) / stats.total_capacity
    storage = grid.storage_power / stats.total_capacity
    # flexible cover: S_Flex - S_Var >= peak - storage
    flex_gap = (peak - storage) + stats.variable - stats.flexible
    # base + variable must fit under the daily trough
    trough_gap = (stats.avg_cf - 0.5 * peak + storage) - stats.base - stats.variable

    n = len(shares)
    upper, lower = np.full(n, np.nan), np.full(n, np.nan)
    masks = class_masks(classes)
    is_flex = masks[GridClass.FLEXIBLE]
    is_var = masks[GridClass.VARIABLE]
    is_base = masks[GridClass.BASE]
    lower[is_flex] = flex_gap + shares[is_flex]
    upper[is_base] = trough_gap + shares[is_base]
    upper[is_var] = np.minimum(-flex_gap + shares[is_var], trough_gap + shares[is_var])
    return ShareLimits(upper, lower)


def _smootherstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


def limit_gate(share, limit, direction: str, softness: float = DEFAULT_SOFTNESS):
    """Probability of investing given a share and its limit.

    A C2 smooth cumulative profile across limit -/+ softness: 1 well inside
    the allowed region, 0.5 at the limit, exactly 0 once the share is a full
    ``softness`` past it.
    """
    if not softness > 0:
        raise ValueError("softness must be > 0")
    share = np.asarray(share, dtype=float)
    limit = np.asarray(limit, dtype=float)
    # written around the midpoint so the gate is exactly 0.5 at the limit
    if direction == "upper":
        x = 0.5 + (limit - share) / (2.0 * softness)
    elif direction == "lower":
        x = 0.5 + (share - limit) / (2.0 * softness)
    else:
        raise ValueError("direction must be 'upper' or 'lower'")
    gate = _smootherstep(x)
    return float(gate) if gate.ndim == 0 else gate


def gates(shares, limits: ShareLimits, softness: float = DEFAULT_SOFTNESS):
    """(Gmax, Gmin) per technology; 1 where no limit applies."""
    shares = np.asarray(shares, dtype=float)
    gmax = np.ones_like(shares)
    gmin = np.ones_like(shares)
    has_up = ~np.isnan(limits.upper)
    has_lo = ~np.isnan(limits.lower)
    gmax[has_up] = limit_gate(shares[has_up], limits.upper[has_up], "upper", softness)
    gmin[has_lo] = limit_gate(shares[has_lo], limits.lower[has_lo], "lower", softness)
    return gmax, gmin


def _as_preferences(costs) -> np.ndarray:
    if isinstance(costs, np.ndarray) and costs.ndim == 2:
        return costs
    if all(isinstance(c, CostDistribution) for c in costs):
        return preference_matrix(costs)
    raise TypeError("costs must be CostDistribution objects or a preference matrix")


def share_rates(shares, costs, freq, limits: ShareLimits | None = None,
                softness: float = DEFAULT_SOFTNESS) -> np.ndarray:
    """dS/dt of the (gated) shares equation."""
    shares = np.asarray(shares, dtype=float)
    pref = _as_preferences(costs)
    if limits is None:
        gmax = gmin = np.ones_like(shares)
    else:
        gmax, gmin = gates(shares, limits, softness)
    return kernels.share_deltas(shares, freq, pref, gmax, gmin, 1.0)


def shares_step(shares, costs, freq, limits: ShareLimits | None, dt: float,
                softness: float = DEFAULT_SOFTNESS) -> np.ndarray:
    """One explicit Euler step of the shares equation.

    ``costs`` is a sequence of :class:`CostDistribution` or a precomputed
    preference matrix. Negative results are clamped to zero and the clamped
    mass is taken back from the growing technologies in proportion to their
    gains.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    shares = np.asarray(shares, dtype=float)
    pref = _as_preferences(costs)
    if limits is None:
        gmax = gmin = np.ones_like(shares)
    else:
        gmax, gmin = gates(shares, limits, softness)
    delta = kernels.share_deltas(shares, freq, pref, gmax, gmin, dt)
    biggest = float(np.max(np.abs(delta))) if len(delta) else 0.0
    if biggest > MAX_STEP_CHANGE:
        raise StepSizeError(
            f"share change {biggest:.3g} in one step exceeds {MAX_STEP_CHANGE}; use a smaller dt"
        )
    new = shares + delta
    negative = new < 0
    if np.any(negative):
        deficit = math.fsum(-new[negative])
        new[negative] = 0.0
        gaining = delta > 0
        gain = math.fsum(delta[gaining])
        if gain > 0:
            new[gaining] -= deficit * delta[gaining] / gain
        new = np.maximum(new, 0.0)
        new /= math.fsum(new)
    return new


@dataclass(frozen=True)
class Violation:
    name: str
    slack: float


def constraint_slacks(shares, grid: GridParams, classes, stats: CapacityStats) -> dict:
    """Slack of the three grid inequalities (negative means violated).

    The energy inequality is evaluated per day: demand is converted to
    GWh/day so it matches the storage (GWh) and peak energy (GWh/day) terms.
    """
    u_tot = stats.total_capacity
    daily_demand = stats.demand / 365.0
    peak = grid.peak_gw(u_tot) / u_tot
    storage = grid.storage_power / u_tot
    if daily_demand > 0:
        need = stats.avg_cf * (
            grid.peak_energy_gwh(u_tot) / daily_demand
            + stats.variable * u_tot * grid.day_length / daily_demand
            - grid.storage_energy / daily_demand
        )
    else:
        need = 0.0
    return {
        "flexible_energy": (stats.flexible_output + stats.variable_output) - need,
        "flexible_capacity": (stats.flexible - stats.variable) - (peak - storage),
        "baseload_ceiling": (stats.avg_cf - 0.5 * peak + storage) - (stats.base + stats.variable),
    }


def check_constraints(shares, grid: GridParams, classes, stats: CapacityStats,
                      tolerance: float = 0.0) -> list[Violation]:
    slacks = constraint_slacks(shares, grid, classes, stats)
    return [Violation(name, s) for name, s in slacks.items() if s < -tolerance]


def weighted_sum(weights: Sequence[float], values: Sequence[float]) -> float:
    return math.fsum(np.asarray(weights, float) * np.asarray(values, float))
