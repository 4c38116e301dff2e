"""Levelised costs, investor preferences and learning-by-doing.

Learning applies to the investment component only; fuel and O&M costs come
from the technology table or from resource cost-supply curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import kernels
from .techdata import TechnologyRegistry, TechnologySpec

HOURS_PER_YEAR = 8760.0
SPREAD_FLOOR = 1e-6


@dataclass(frozen=True)
class CostDistribution:
    """Normal distribution of LCOE values ($/MWh) across prospective projects."""

    median: float
    spread: float

    def __post_init__(self):
        if not math.isfinite(self.median):
            raise ValueError("median must be finite")
        if not (self.spread > 0 and math.isfinite(self.spread)):
            raise ValueError("spread must be finite and > 0")


@lru_cache(maxsize=256)
def discount_sum(discount_rate: float, lifetime: float) -> float:
    """Sum of (1 + r)^-t over integer years t = 0 .. floor(lifetime)."""
    years = math.floor(lifetime) + 1
    if discount_rate == 0:
        return float(years)
    v = 1.0 / (1.0 + discount_rate)
    return (1.0 - v ** years) / (1.0 - v)


def carbon_cost(emission_factor: float, carbon_price: float) -> float:
    """Carbon cost in $/MWh; emission factor in t/GWh, price in $/t."""
    return emission_factor * carbon_price / 1000.0


def lcoe(
    spec: TechnologySpec,
    learned_invest_cost: float,
    fuel_price: float,
    carbon_price: float,
    discount_rate: float,
    offset: float = 0.0,
) -> CostDistribution:
    """Levelised cost of electricity of one technology.

    The whole investment is spent in year 0; O&M, fuel and carbon costs and
    the expected production are constant over years 0..lifetime. Negative
    emission factors give a negative carbon term (allowance income).
    ``offset`` is an optional per-technology $/MWh adjustment (policy hook).
    """
    for value in (learned_invest_cost, fuel_price, carbon_price, discount_rate, offset):
        if not math.isfinite(value):
            raise ValueError("lcoe inputs must be finite")
    if discount_rate < 0:
        raise ValueError("discount_rate must be >= 0")
    if spec.lifetime < 1:
        raise ValueError("lcoe needs a lifetime of at least one year")

    # per kW of capacity: $/kW up front, MWh/kW each year
    production = spec.capacity_factor * HOURS_PER_YEAR / 1000.0
    annual = spec.om_cost + fuel_price + carbon_cost(spec.emission_factor, carbon_price)
    median = learned_invest_cost / (production * discount_sum(discount_rate, spec.lifetime))
    median += annual + offset
    spread = max(spec.cost_spread * abs(median), SPREAD_FLOOR)
    return CostDistribution(median, spread)


def preference(cost_i: CostDistribution, cost_j: CostDistribution) -> float:
    """Probability that a project of ``i`` comes out cheaper than one of ``j``."""
    return float(kernels.preference_matrix(
        [cost_i.median, cost_j.median], [cost_i.spread, cost_j.spread]
    )[0, 1])


def preference_matrix(costs) -> np.ndarray:
    """Matrix F[i, j] = preference(costs[i], costs[j])."""
    return kernels.preference_matrix(
        [c.median for c in costs], [c.spread for c in costs]
    )


@dataclass(frozen=True)
class LearningState:
    """Cumulative capacity ledger driving experience curves (all arrays per technology).

    ``cumulative`` and ``base_capacity`` in GW, ``base_cost`` in $/kW.
    """

    ids: tuple[str, ...]
    cumulative: np.ndarray
    base_capacity: np.ndarray
    base_cost: np.ndarray
    exponents: np.ndarray

    @classmethod
    def from_registry(cls, registry: TechnologyRegistry, base_capacity=None) -> "LearningState":
        if base_capacity is None:
            base_capacity = registry.column("initial_cumulative_capacity")
        base_capacity = np.array(base_capacity, dtype=float)
        return cls(
            ids=registry.ids,
            cumulative=base_capacity.copy(),
            base_capacity=base_capacity,
            base_cost=registry.column("invest_cost"),
            exponents=registry.column("learning_exponent"),
        )


def accumulate_capacity(
    state: LearningState,
    spillover: np.ndarray,
    capacity_change,
    capacity,
    decommission_rates,
    dt: float,
) -> LearningState:
    """Advance cumulative capacity by one step.

    Gross additions count replacement builds (decommission_rate * capacity *
    dt) even when net capacity is flat or falling, plus any positive net
    change. Knowledge is shared through ``spillover``.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    change = np.asarray(capacity_change, dtype=float)
    additions = np.maximum(change, 0.0) + np.asarray(decommission_rates) * np.asarray(capacity) * dt
    # exactly rounded rows so the result does not depend on technology order
    gained = np.array([math.fsum(row) for row in spillover * additions[None, :]])
    return replace(state, cumulative=state.cumulative + np.maximum(gained, 0.0))


def learned_cost(state: LearningState, tech: str | int) -> float:
    """Experience-curve investment cost C0 * (W / W0) ** -b."""
    k = state.ids.index(tech) if isinstance(tech, str) else tech
    w0 = state.base_capacity[k]
    if w0 <= 0:
        raise ValueError(f"technology {state.ids[k]!r} has zero base capacity")
    return float(state.base_cost[k] * math.pow(state.cumulative[k] / w0, -state.exponents[k]))


def learned_costs(state: LearningState) -> np.ndarray:
    return np.array([learned_cost(state, k) for k in range(len(state.ids))])
