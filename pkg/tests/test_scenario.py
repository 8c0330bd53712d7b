import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sensornet.scenario import (BOLTZMANN, BaseStation, ScenarioError, SensorType, channel_gain,
                                harvested_power, load_scenario, measurement_gain, node_power,
                                parse_power, reference_path, scenario_to_dict, serialize)

from factory import random_doc

coord = st.floats(-1e3, 1e3, allow_nan=False)
pos = st.floats(1e-6, 1e3, allow_nan=False)


def minimal_doc():
    return {
        "field": [10, 10],
        "locations": [[1, 1]],
        "sources": [[5, 5]],
        "fc": [0, 0],
        "base_stations": [],
        "sensor_types": [{"cost": 0, "eh_efficiency": 0, "battery_cap": {"w": 0}},
                         {"cost": 1, "eh_efficiency": 0.5, "battery_cap": {"w": 1e-3}}],
        "bandwidths": [{"hz": 1000, "channels": 1}],
        "grid": {"T": 1e-3, "W": 1000, "N_T": 1, "N_F": 1},
        "budgets": {"cost_cap": 1},
        "noise": {"measurement_var": 1},
        "static_prior": [[1]],
        "dynamic_prior": {"a": 0.5, "process_var": 1},
    }


def test_minimal_document():
    sc = load_scenario(json.dumps(minimal_doc()))
    assert (sc.L, sc.K, sc.B, sc.m) == (1, 1, 1, 1)
    assert sc.temperature == 290.0  # default receiver temperature
    assert sc.receiver_noise_var == pytest.approx(BOLTZMANN * 290.0 * 1000.0, rel=1e-15)


def test_unstable_dynamics_names_field():
    doc = minimal_doc()
    doc["dynamic_prior"]["a"] = 1.2
    with pytest.raises(ScenarioError) as err:
        load_scenario(json.dumps(doc))
    assert err.value.field == "dynamic_prior.a"
    assert "dynamic_prior.a" in str(err.value)


def test_reference_table_values(static_sc, dynamic_sc):
    for sc in (static_sc, dynamic_sc):
        assert sc.costs.tolist() == [0, 1, 2, 3]
        assert sc.widths.tolist() == [20e3, 40e3, 60e3]
        assert sc.dynamic_prior.a == 0.71
        assert sc.dynamic_prior.process_var == 5
        assert sc.measurement_var == 1
        assert sc.path_loss_exponent == 2
        assert sc.diffusion == (10, 100, 250)
        assert [t.eh_efficiency for t in sc.sensor_types] == [0, 0.3, 0.6, 0.9]
        assert [t.battery_cap for t in sc.sensor_types] == pytest.approx([0, 0.3e-3, 0.6e-3, 0.9e-3])
        assert sc.receiver_noise_var == pytest.approx(1e-9, rel=1e-12)  # -60 dBm
        assert sc.base_stations[0].power == pytest.approx(10 ** 0.1)  # 1 dB read as dBW
    assert static_sc.m == 5 and np.array_equal(static_sc.static_prior, np.eye(5))
    assert dynamic_sc.m == 1 and tuple(dynamic_sc.sources[0]) == (290, 180)


def test_parse_error_has_line_context():
    text = '{\n  "field": [10, 10],\n  "locations": [[1, 1]]\n  "oops": 1\n}'
    with pytest.raises(ScenarioError, match="line 4"):
        load_scenario(text)


@pytest.mark.parametrize("mutate,field", [
    (lambda d: d.__setitem__("static_prior", [[-1]]), "static_prior"),
    (lambda d: d["sensor_types"][0].__setitem__("cost", 1), "sensor_types[0]"),
    (lambda d: d["bandwidths"][0].__setitem__("hz", 2000), "bandwidths[0]"),
    (lambda d: d["bandwidths"][0].__setitem__("channels", 0), "bandwidths[0].channels"),
    (lambda d: d["propagation"] if False else d.__setitem__("propagation", {"path_loss_exponent": 0}),
     "propagation.path_loss_exponent"),
    (lambda d: d.__setitem__("locations", [[0, 0]]), "locations[0]"),
    (lambda d: d["grid"].__setitem__("T", 0), "grid.T"),
])
def test_invariant_violations_name_field(mutate, field):
    doc = minimal_doc()
    mutate(doc)
    with pytest.raises(ScenarioError) as err:
        load_scenario(json.dumps(doc))
    assert err.value.field == field


def test_non_symmetric_prior_rejected():
    doc = minimal_doc()
    doc["sources"] = [[5, 5], [6, 6]]
    doc["static_prior"] = [[1, 0.5], [0, 1]]
    with pytest.raises(ScenarioError, match="symmetric"):
        load_scenario(json.dumps(doc))


def test_power_units():
    assert parse_power({"w": 2.5}, "x") == 2.5
    assert parse_power({"dbm": 30}, "x") == pytest.approx(1.0)
    assert parse_power({"dbm": -60}, "x") == pytest.approx(1e-9)
    assert parse_power({"db": 10}, "x") == pytest.approx(10.0)
    with pytest.raises(ScenarioError):
        parse_power({"mw": 1}, "x")


# geometry

def test_channel_gain_examples():
    assert channel_gain((1, 0), (0, 0), 3.7) == 1.0
    assert channel_gain((10, 0), (0, 0), 2) == pytest.approx(0.01, rel=1e-15)
    with pytest.raises(ValueError):
        channel_gain((3, 4), (3, 4), 2)


@given(coord, coord, coord, coord, st.floats(0.5, 4))
def test_channel_gain_matches_distance_oracle(x1, y1, x2, y2, alpha):
    d = math.sqrt((x1 - x2) ** 2 + (y1 - y2) ** 2)
    if d < 1e-3:
        return
    assert channel_gain((x1, y1), (x2, y2), alpha) == pytest.approx(d ** -alpha, rel=1e-12)


@given(st.lists(pos, min_size=2, max_size=20, unique=True), st.floats(0.1, 5))
def test_channel_gain_strictly_decreasing(ds, alpha):
    ds = sorted(ds)
    g = [channel_gain((d, 0.0), (0.0, 0.0), alpha) for d in ds]
    assert all(a > b for a, b in zip(g, g[1:]) if a != b) and g[0] >= g[-1]
    assert all(a >= b for a, b in zip(g, g[1:]))


def test_measurement_gain_examples():
    assert measurement_gain((3, 3), (3, 3), 10, 100, 250) == 10
    assert measurement_gain((0, 0), (251, 0), 10, 100, 250) == 0.0
    assert measurement_gain((0, 0), (100, 0), 10, 100, 250) == pytest.approx(10 * math.exp(-1), rel=1e-15)
    assert measurement_gain((0, 0), (100, 0), 10, 100, 250) == pytest.approx(3.6788, abs=1e-4)


@given(st.floats(0, 250), st.floats(0, 250))
def test_measurement_gain_shape(d1, d2):
    b = (10, 100, 250)
    g1 = measurement_gain((0, 0), (d1, 0), *b)
    g2 = measurement_gain((0, 0), (d2, 0), *b)
    if d1 <= d2:
        assert g1 >= g2
    assert measurement_gain((0, 0), (250 + 1e-9 + d1, 0), *b) == 0.0
    # continuous below the cutoff
    assert abs(measurement_gain((0, 0), (d1 * 0.999, 0), *b) - measurement_gain((0, 0), (d1 * 0.999 + 1e-9, 0), *b)) < 1e-9


def test_harvested_power_examples():
    assert harvested_power((5, 5), [], 0.25, 2) == 0.25
    assert harvested_power((1, 0), [BaseStation((0, 0), 1.0)], 0.0, 2) == 1.0
    with pytest.raises(ValueError):
        harvested_power((0, 0), [BaseStation((0, 0), 1.0)], 0.0, 2)


def test_harvested_power_term_by_term(rng):
    for _ in range(20):
        p = rng.uniform(0, 100, 2)
        bss = [BaseStation(tuple(rng.uniform(0, 100, 2)), float(rng.uniform(0.1, 2))) for _ in range(2)]
        floor = float(rng.uniform(0, 1e-3))
        alpha = float(rng.uniform(1.5, 4))
        expected = floor
        for bs in bss:
            dx, dy = p[0] - bs.position[0], p[1] - bs.position[1]
            expected += bs.power / (dx * dx + dy * dy) ** (alpha / 2)
        assert harvested_power(p, bss, floor, alpha) == pytest.approx(expected, rel=1e-12)


def test_node_power_examples():
    assert node_power(1.0, SensorType(0, 0, 0)) == 0
    assert node_power(1e-3, SensorType(1, 0.3, 1e-3)) == pytest.approx(0.3e-3)
    assert node_power(2e-3, SensorType(2, 0.6, 0.6e-3)) == pytest.approx(0.6e-3)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1e-2))
def test_node_power_monotone(rho1, rho2, eta1, eta2, eps):
    lo, hi = sorted((rho1, rho2))
    elo, ehi = sorted((eta1, eta2))
    assert node_power(lo, SensorType(1, elo, eps)) <= node_power(hi, SensorType(1, elo, eps))
    assert node_power(lo, SensorType(1, elo, eps)) <= node_power(lo, SensorType(1, ehi, eps))
    assert node_power(lo, SensorType(1, elo, eps)) <= node_power(lo, SensorType(1, elo, 2 * eps))


# serialization

def _assert_same(a, b):
    da, db = scenario_to_dict(a), scenario_to_dict(b)

    def walk(x, y, path):
        if isinstance(x, dict):
            assert x.keys() == y.keys(), path
            for k in x:
                walk(x[k], y[k], f"{path}.{k}")
        elif isinstance(x, list):
            assert len(x) == len(y), path
            for i, (u, v) in enumerate(zip(x, y)):
                walk(u, v, f"{path}[{i}]")
        elif isinstance(x, int) and not isinstance(x, bool):
            assert x == y, path
        elif isinstance(x, float):
            assert x == pytest.approx(y, rel=1e-12, abs=0), path
        else:
            assert x == y, path
    walk(da, db, "")


def test_round_trip_reference(static_sc, dynamic_sc):
    for sc in (static_sc, dynamic_sc):
        _assert_same(load_scenario(serialize(sc)), sc)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6), st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
def test_round_trip_random(seed, L, K, B, m):
    rng = np.random.default_rng(seed)
    sc = load_scenario(json.dumps(random_doc(rng, L=L, K=K, B=B, m=m)))
    again = load_scenario(serialize(sc))
    _assert_same(again, sc)
    assert again.channel_counts.dtype.kind == "i"


def test_schema_validates_shipped_documents():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads(reference_path("scenario.schema").read_text())
    for name in ("reference_static", "reference_dynamic", "grid_example_T1s"):
        jsonschema.validate(json.loads(reference_path(name).read_text()), schema)
    jsonschema.validate(minimal_doc(), schema)
    bad = minimal_doc()
    bad["sensor_types"][1]["battery_cap"] = {"kw": 1}
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, schema)
