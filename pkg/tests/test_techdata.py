import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from powerladder import techdata
from powerladder.errors import DataError
from powerladder.techdata import GridClass, TechnologySpec, load_registry

ROW = """
[[technology]]
id = "t{k}"
name = "T{k}"
invest_cost = 1000.0
fuel_cost = 10.0
om_cost = 5.0
emission_factor = 100.0
lifetime = {lifetime}
build_time = 2.0
learning_exponent = 0.1
capacity_factor = 0.5
grid_class = "Base"
"""


def doc(*rows):
    return "format_version = 1\n" + "".join(rows)


def test_shipped_table_has_24_technologies(registry):
    assert len(registry) == 24
    assert registry.ids[0] == "nuclear" and registry.ids[-1] == "chp"


def test_table_values_spot_check(registry):
    coal = registry["coal"]
    assert (coal.invest_cost, coal.emission_factor, coal.lifetime, coal.build_time) == (
        2134.0, 852.0, 40.0, 4.0)
    assert registry["bigcc_ccs"].emission_factor == -981.0
    assert registry["solar_pv"].learning_exponent == 0.269


def test_negative_emissions_only_for_bio_ccs(registry):
    negative = {t.id for t in registry if t.emission_factor < 0}
    assert negative and all(registry[t].is_bio_ccs for t in negative)


def test_decommission_rate_times_lifetime_is_one(registry):
    for tech in registry:
        assert tech.decommission_rate * tech.lifetime == 1.0


def test_empty_list_rejected():
    with pytest.raises(DataError, match="no technologies"):
        load_registry("format_version = 1\n")


def test_zero_lifetime_rejected():
    with pytest.raises(DataError, match="t0.*lifetime"):
        load_registry(doc(ROW.format(k=0, lifetime=0.0)))


def test_duplicate_id_rejected():
    with pytest.raises(DataError, match="duplicate"):
        load_registry(doc(ROW.format(k=0, lifetime=10.0), ROW.format(k=0, lifetime=10.0)))


def test_missing_field_names_row():
    text = doc(ROW.format(k=3, lifetime=10.0)).replace('grid_class = "Base"\n', "")
    with pytest.raises(DataError, match="t3.*grid_class"):
        load_registry(text)


def test_parse_failure_and_version():
    with pytest.raises(DataError, match="parse"):
        load_registry("[[technology")
    with pytest.raises(DataError, match="format_version"):
        load_registry("format_version = 9\n")


def test_declaration_order_is_kept():
    reg = load_registry(doc(*(ROW.format(k=k, lifetime=10.0) for k in (2, 0, 1))))
    assert reg.ids == ("t2", "t0", "t1")


def test_round_trip(registry):
    again = load_registry(techdata.dump_registry(registry))
    assert again == registry
    assert load_registry(techdata.dump_registry(again)) == again


def test_default_spillover(registry):
    b = techdata.default_spillover(registry)
    idx = registry.index
    assert np.all(np.diag(b) == 1.0) and np.all(b >= 0)
    assert b[idx("onshore"), idx("offshore")] == b[idx("offshore"), idx("onshore")] > 0
    assert b[idx("igcc"), idx("bigcc")] > 0 and b[idx("ccgt"), idx("igcc")] > 0
    assert b[idx("nuclear"), idx("solar_pv")] == 0
    assert np.array_equal(b, b.T)


def test_grid_classes(registry):
    assert registry["hydro"].grid_class is GridClass.FLEXIBLE
    assert registry["onshore"].grid_class is GridClass.VARIABLE
    assert registry["nuclear"].grid_class is GridClass.BASE
    assert registry.class_mask("Variable").sum() == 6


MUTATIONS = {
    "lifetime": st.floats(-100, 0),
    "build_time": st.floats(-100, 0),
    "capacity_factor": st.one_of(st.floats(-1, 0), st.floats(1.0001, 10)),
    "learning_exponent": st.floats(-5, -1e-6),
    "cost_spread": st.floats(-1, 0),
    "emission_factor": st.floats(-2000, -1e-3),
    "invest_cost": st.floats(-1e4, -1e-3),
    "heat_rate": st.floats(-10, 0),
}


@given(st.sampled_from(sorted(MUTATIONS)).flatmap(
    lambda name: st.tuples(st.just(name), MUTATIONS[name])))
def test_every_invariant_violation_rejected(registry, mutation):
    name, value = mutation
    row = dataclasses.asdict(registry["coal"])
    row[name] = value
    with pytest.raises(DataError, match="coal"):
        TechnologySpec(**row)
