import dataclasses
import math
import random

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from powerladder import costs, techdata
from powerladder.costs import CostDistribution, LearningState, lcoe, preference
from powerladder.techdata import TechnologySpec

HOURS = 8760.0


def spec(**kw):
    base = dict(id="x", name="X", invest_cost=1000.0, fuel_cost=20.0, om_cost=5.0,
                emission_factor=500.0, lifetime=20.0, build_time=2.0, learning_exponent=0.1,
                capacity_factor=0.5, grid_class="Base")
    base.update(kw)
    return TechnologySpec(**base)


def brute_lcoe(invest, om, fuel, alpha, price, cf, rate, lifetime):
    """Year-by-year discounted sums: capital at year 0, running costs every year."""
    cost = production = 0.0
    mwh_per_kw = cf * HOURS / 1000.0
    for year in range(int(lifetime) + 1):
        factor = (1.0 + rate) ** -year
        running = om + fuel + alpha * price / 1000.0
        cost += ((invest if year == 0 else 0.0) + running * mwh_per_kw) * factor
        production += mwh_per_kw * factor
    return cost / production


def test_coal_carbon_cost_component(registry):
    assert math.isclose(costs.carbon_cost(registry["coal"].emission_factor, 22.0), 18.744,
                        rel_tol=1e-12)


def test_zero_components_give_zero_median():
    s = spec(invest_cost=0.0, fuel_cost=0.0, om_cost=0.0, emission_factor=0.0)
    d = lcoe(s, 0.0, 0.0, 22.0, 0.1)
    assert d.median == 0.0 and d.spread > 0


def test_undiscounted_om_only_oracle():
    s = spec(invest_cost=0.0, om_cost=7.5, emission_factor=0.0, lifetime=2.0)
    # three years of 7.5 $/MWh over three years of output
    total_om = 3 * 7.5 * 0.5 * HOURS / 1000
    total_ep = 3 * 0.5 * HOURS / 1000
    assert math.isclose(lcoe(s, 0.0, 0.0, 0.0, 0.0).median, total_om / total_ep, rel_tol=1e-12)


def test_against_brute_force_on_random_parameter_sets():
    rng = random.Random(7)
    for _ in range(100):
        p = dict(invest=rng.uniform(0, 8000), om=rng.uniform(0, 60), fuel=rng.uniform(0, 200),
                 alpha=rng.uniform(-1000, 1000), price=rng.uniform(0, 300),
                 cf=rng.uniform(0.05, 1.0), rate=rng.uniform(0, 0.3),
                 lifetime=float(rng.randint(1, 80)))
        s = spec(om_cost=p["om"], emission_factor=abs(p["alpha"]), capacity_factor=p["cf"],
                 lifetime=p["lifetime"])
        got = lcoe(s, p["invest"], p["fuel"], p["price"], p["rate"]).median
        want = brute_lcoe(p["invest"], p["om"], p["fuel"], abs(p["alpha"]), p["price"],
                          p["cf"], p["rate"], p["lifetime"])
        assert math.isclose(got, want, rel_tol=1e-9)


def test_spread_is_relative_and_floored():
    d = lcoe(spec(), 1000.0, 20.0, 22.0, 0.1)
    assert math.isclose(d.spread, 0.1 * d.median)
    zero = lcoe(spec(invest_cost=0, fuel_cost=0, om_cost=0, emission_factor=0), 0, 0, 0, 0.1)
    assert zero.spread == costs.SPREAD_FLOOR


def test_non_finite_inputs_rejected():
    with pytest.raises(ValueError):
        lcoe(spec(), math.nan, 20.0, 22.0, 0.1)
    with pytest.raises(ValueError):
        lcoe(spec(), 1000.0, math.inf, 22.0, 0.1)


def test_discounting_weights_later_fuel_less():
    s = spec(invest_cost=0.0, om_cost=0.0, emission_factor=0.0)
    # fuel only: constant so the ratio stays the fuel price regardless of r
    assert math.isclose(lcoe(s, 0.0, 30.0, 0.0, 0.2).median, 30.0)
    # capital is charged up front, so a higher rate raises its levelised share
    assert lcoe(s, 1000.0, 30.0, 0.0, 0.2).median > lcoe(s, 1000.0, 30.0, 0.0, 0.05).median


@given(st.one_of(st.just(0.0), st.floats(1e-3, 1000), st.floats(-1000, -1e-3)),
       st.floats(0, 500), st.floats(0.01, 200))
def test_lcoe_monotone_in_carbon_price(alpha, price, bump):
    bio = alpha < 0
    s = spec(emission_factor=alpha, resource_id="biomass" if bio else None,
             id="bigcc_ccs" if bio else "x")
    lo = lcoe(s, 1000.0, 20.0, price, 0.1).median
    hi = lcoe(s, 1000.0, 20.0, price + bump, 0.1).median
    if alpha > 0:
        assert hi > lo
    elif alpha < 0:
        assert hi < lo
    else:
        assert hi == lo


def test_preference_examples():
    a = CostDistribution(50.0, 5.0)
    assert preference(a, a) == 0.5
    b = CostDistribution(50.0 + 10 * math.sqrt(50.0), 5.0)
    assert preference(a, b) > 0.999
    sigma = math.sqrt(2 * 5.0 ** 2)
    c = CostDistribution(50.0 + sigma, 5.0)
    assert math.isclose(preference(c, a), 0.158655253931457, rel_tol=1e-12)


@given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_preference_complementary(m1, m2, s1, s2):
    f = preference(CostDistribution(m1, s1), CostDistribution(m2, s2))
    g = preference(CostDistribution(m2, s2), CostDistribution(m1, s1))
    assert 0 < f < 1
    assume(min(f, g) > 1e-200)
    assert abs(f + g - 1) <= 1e-12


def test_preference_matrix_matches_scalar():
    ds = [CostDistribution(m, 0.1 * m) for m in (40.0, 55.0, 90.0)]
    mat = costs.preference_matrix(ds)
    for i, a in enumerate(ds):
        for j, b in enumerate(ds):
            assert mat[i, j] == preference(a, b)


# -- learning --------------------------------------------------------------

def one_tech_state(w0=10.0, c0=1000.0, b=0.1, w=None):
    return LearningState(("x",), np.array([w if w is not None else w0]), np.array([w0]),
                         np.array([c0]), np.array([b]))


def test_learned_cost_identity_and_examples(registry):
    assert costs.learned_cost(one_tech_state(), "x") == 1000.0
    b_on = registry["onshore"].learning_exponent
    assert math.isclose(costs.learned_cost(one_tech_state(b=b_on, w=20.0), 0) / 1000.0,
                        2 ** -0.105, rel_tol=1e-12)
    assert math.isclose(2 ** -0.105, 0.9298, abs_tol=5e-5)
    b_pv = registry["solar_pv"].learning_exponent
    assert math.isclose(costs.learned_cost(one_tech_state(b=b_pv, w=40.0), 0) / 1000.0,
                        0.689, abs_tol=5e-4)


def test_learned_cost_zero_base_capacity():
    with pytest.raises(ValueError, match="zero base capacity"):
        costs.learned_cost(one_tech_state(w0=0.0, w=1.0), 0)


def test_doubling_every_table_technology(registry):
    state = LearningState.from_registry(registry)
    doubled = dataclasses.replace(state, cumulative=2 * state.cumulative)
    for k, tech in enumerate(registry):
        ratio = costs.learned_cost(doubled, k) / costs.learned_cost(state, k)
        assert math.isclose(ratio, 2 ** -tech.learning_exponent, rel_tol=1e-12)


def test_incremental_form(registry):
    """Central difference at dW/W = 1e-4 against -b C / W."""
    state = LearningState.from_registry(registry)
    for k, tech in enumerate(registry):
        w = state.cumulative[k]
        dw = 1e-4 * w
        unit = np.arange(len(registry)) == k
        up = dataclasses.replace(state, cumulative=state.cumulative + dw * unit)
        down = dataclasses.replace(state, cumulative=state.cumulative - dw * unit)
        slope = (costs.learned_cost(up, k) - costs.learned_cost(down, k)) / (2 * dw)
        expected = -tech.learning_exponent * costs.learned_cost(state, k) / w
        assert math.isclose(slope, expected, rel_tol=1e-6, abs_tol=1e-300)


@given(st.floats(1.0, 1e6), st.floats(0, 0.5))
def test_learned_cost_non_increasing(w, b):
    lo = costs.learned_cost(one_tech_state(b=b, w=10.0 + w), 0)
    hi = costs.learned_cost(one_tech_state(b=b, w=10.0 + 2 * w), 0)
    assert hi <= lo <= 1000.0


def test_replacement_builds_count(registry):
    ids = ("a", "b")
    state = LearningState(ids, np.array([100.0, 50.0]), np.array([100.0, 50.0]),
                          np.ones(2), np.zeros(2))
    spill = np.array([[1.0, 0.5], [0.5, 1.0]])
    # no net change; replacements of 0.05/y * 100 GW over 1 y = 5 GW
    out = costs.accumulate_capacity(state, spill, [0.0, 0.0], [100.0, 0.0], [0.05, 0.0], 1.0)
    assert np.allclose(out.cumulative - state.cumulative, [5.0, 2.5])
    same = costs.accumulate_capacity(state, spill, [0.0, 0.0], [0.0, 0.0], [0.05, 0.05], 1.0)
    assert np.array_equal(same.cumulative, state.cumulative)


def test_onshore_spillover_to_offshore(registry):
    state = LearningState.from_registry(registry)
    spill = techdata.default_spillover(registry)
    change = np.zeros(24)
    change[registry.index("onshore")] = 10.0
    out = costs.accumulate_capacity(state, spill, change, np.zeros(24), np.zeros(24), 1.0)
    gain = out.cumulative - state.cumulative
    assert math.isclose(gain[registry.index("offshore")], 5.0)
    assert math.isclose(gain[registry.index("onshore")], 10.0)
    assert np.count_nonzero(gain) == 2


@given(st.lists(st.floats(-50, 50), min_size=24, max_size=24),
       st.lists(st.floats(0, 500), min_size=24, max_size=24))
def test_cumulative_never_decreases(registry, change, capacity):
    state = LearningState.from_registry(registry)
    spill = techdata.default_spillover(registry)
    delta = np.array([t.decommission_rate for t in registry])
    out = costs.accumulate_capacity(state, spill, change, capacity, delta, 0.25)
    assert np.all(out.cumulative >= state.cumulative)
    assert np.all(out.cumulative >= out.base_capacity)
