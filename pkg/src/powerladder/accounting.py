"""Capacity, generation, investment and emissions bookkeeping.

Shares are capacity shares. Capacity factors are stored dimensionless and the
8760 h/y conversion is applied explicitly where energy meets power.
Units: demand and generation GWh/y, capacity GW, investment $/y, emissions
tCO2/y and tCO2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .costs import HOURS_PER_YEAR


@dataclass(frozen=True)
class PowerState:
    capacity: np.ndarray
    generation: np.ndarray
    demand: float
    avg_cf: float

    @property
    def total_capacity(self) -> float:
        return math.fsum(self.capacity)


def capacities(shares, demand: float, cf) -> PowerState:
    """U_i = S_i D / (CF-bar 8760) and G_i = U_i CF_i 8760."""
    shares = np.asarray(shares, dtype=float)
    cf = np.asarray(cf, dtype=float)
    if demand < 0:
        raise ValueError("demand must be >= 0")
    avg_cf = math.fsum(shares * cf)
    if not avg_cf > 0:
        raise ValueError("average capacity factor is zero: no generating technology")
    capacity = shares * (demand / (avg_cf * HOURS_PER_YEAR))
    generation = capacity * cf * HOURS_PER_YEAR
    return PowerState(capacity, generation, float(demand), avg_cf)


def investment(prev_capacity, new_capacity, dt: float, cost, decommission) -> np.ndarray:
    """Investment in $/y per technology (cost in $/kW, capacity in GW).

    Growing technologies pay for net growth plus replacements; the others
    only replace retiring plants.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    prev_capacity = np.asarray(prev_capacity, dtype=float)
    new_capacity = np.asarray(new_capacity, dtype=float)
    growth = (new_capacity - prev_capacity) / dt
    builds = np.asarray(decommission, dtype=float) * new_capacity + np.maximum(growth, 0.0)
    return np.asarray(cost, dtype=float) * builds * 1e6


def emission_rate(generation, emission_factors) -> float:
    return math.fsum(np.asarray(emission_factors, float) * np.asarray(generation, float))


def emissions(generation, emission_factors, prev_cumulative: float = 0.0, dt: float = 1.0,
              prev_rate: float | None = None) -> tuple[float, float]:
    """(rate, cumulative): rate = sum alpha_i G_i, cumulative by trapezoid.

    Without ``prev_rate`` the previous rate is taken equal to the current one.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    rate = emission_rate(generation, emission_factors)
    if prev_rate is None:
        prev_rate = rate
    return rate, prev_cumulative + 0.5 * (prev_rate + rate) * dt


def average_lcoe(shares, lcoe) -> float:
    return math.fsum(np.asarray(shares, float) * np.asarray(lcoe, float))
