import json

import numpy as np
import pytest

from apmas.core.analysis import closed_loop_spectrum
from apmas.core.errors import GraphNotConnected, InvalidParams, ParseError, TooManyInputs, ValidationError
from apmas.core.graph_core import is_connected, laplacian, symmetric_eigendecomposition
from apmas.core.input_layout import build_derived
from apmas.core.protocol_dynamics import default_step
from apmas.core.scenario import (Scenario, dumps_scenario, horizon, load_scenario, random_scenario, save_scenario,
                                 scenario_from_dict)


def write(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data, encoding="utf-8")
    return path


def test_minimal_file_gets_defaults(tmp_path):
    path = write(tmp_path, {"n": 2, "edges": [[1, 2]], "inputs": [{"value": 4.0, "targets": [1]}]})
    scenario = load_scenario(path)
    assert scenario.name == "scenario"
    assert scenario.params.alpha == 1.0 and scenario.params.gamma == 1.0
    assert scenario.params.dt == default_step(scenario.graph, scenario.inputs)
    F = laplacian(scenario.graph) + build_derived(scenario.inputs).K1
    assert scenario.params.t_final == pytest.approx(horizon(scenario.graph, scenario.inputs))
    assert scenario.params.t_final >= 50.0 / symmetric_eigendecomposition(F)[0][0]
    assert np.array_equal(scenario.initial_x(), [0.0, 0.0])
    assert np.array_equal(scenario.initial_xi(), [0.0, 0.0])
    assert scenario.seed is None


def test_edge_out_of_range_names_field(tmp_path):
    path = write(tmp_path, {"n": 2, "edges": [[1, 3]], "inputs": [{"value": 1.0, "targets": [1]}]})
    with pytest.raises(ValidationError) as excinfo:
        load_scenario(path)
    assert excinfo.value.field == "edges[0]"
    assert excinfo.value.exit_code == 2


@pytest.mark.parametrize("document, field", [
    ({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1.0, "targets": [1]}], "colour": "red"}, "colour"),
    ({"edges": [], "inputs": []}, "n"),
    ({"n": 0, "edges": [], "inputs": []}, "n"),
    ({"n": 2, "edges": [[1, 2, 3]], "inputs": [{"value": 1.0, "targets": [1]}]}, "edges[0]"),
    ({"n": 2, "edges": [[1, 2]], "inputs": {"value": 1.0}}, "inputs"),
    ({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1.0}]}, "inputs[0]"),
    ({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1.0, "targets": 1}]}, "inputs[0].targets"),
    ({"n": 2, "edges": [[1, 2]], "inputs": [{"value": "a", "targets": [1]}]}, "inputs[0].value"),
    ({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1.0, "targets": [3]}]}, "inputs[0].targets"),
    ({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1.0, "targets": [1]}], "alpha": -1}, "alpha"),
    ({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1.0, "targets": [1]}], "dt": "big"}, "dt"),
    ({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1.0, "targets": [1]}], "x0": [0.0]}, "x0"),
    ({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1.0, "targets": [1]}], "xi0": [0.0, None]}, "xi0[1]"),
    ({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1.0, "targets": [1]}], "seed": 1.5}, "seed"),
    ({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1.0, "targets": [1]}], "name": "a/b"}, "name"),
])
def test_validation_names_field(document, field):
    with pytest.raises(ValidationError) as excinfo:
        scenario_from_dict(document)
    assert excinfo.value.field == field


def test_disconnected_graph_rejected():
    with pytest.raises(GraphNotConnected):
        scenario_from_dict({"n": 3, "edges": [[1, 2]], "inputs": [{"value": 1.0, "targets": [1]}]})


def test_too_many_inputs_rejected():
    document = {"n": 1, "edges": [], "inputs": [{"value": 1.0, "targets": [1]}, {"value": 2.0, "targets": [1]}]}
    with pytest.raises(TooManyInputs):
        scenario_from_dict(document)


def test_dt_larger_than_horizon_rejected(p2_document):
    with pytest.raises(InvalidParams):
        scenario_from_dict({**p2_document, "dt": 50.0})


def test_short_horizon_caps_default_step(p2_document):
    scenario = scenario_from_dict({**p2_document, "t_final": 0.004})
    assert scenario.params.dt == 0.004
    assert scenario_from_dict({**p2_document, "t_final": 1.0}).params.dt == 0.01


def test_horizon_covers_slowest_closed_loop_mode(rng):
    for k in range(20):
        scenario = random_scenario(rng, 10, name=f"h{k}")
        L = laplacian(scenario.graph)
        F = L + build_derived(scenario.inputs).K1
        spectrum = closed_loop_spectrum(L, F)
        sigma = np.max(spectrum.real[np.abs(spectrum) >= 1e-8])
        t_final = scenario.params.t_final
        assert t_final >= 50.0 / symmetric_eigendecomposition(F)[0][0]
        assert t_final * -sigma >= 30.0 * (1 - 1e-12)


def test_horizon_follows_integral_gain(p2_document):
    slow = scenario_from_dict({**p2_document, "t_final": None, "gamma": 0.01})
    fast = scenario_from_dict({**p2_document, "t_final": None})
    # the integral mode of the two-agent path decays at about 2 gamma
    assert slow.params.t_final > 1000.0 > fast.params.t_final


def test_malformed_json(tmp_path):
    with pytest.raises(ParseError) as excinfo:
        load_scenario(write(tmp_path, "{not json"))
    assert excinfo.value.exit_code == 2


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_scenario(tmp_path / "absent.json")


def test_overrides_replace_file_values(p2_document):
    scenario = scenario_from_dict({**p2_document, "alpha": 3.0}, {"alpha": 2.0, "gamma": None, "t_final": 5.0})
    assert scenario.params.alpha == 2.0
    assert scenario.params.gamma == 1.0
    assert scenario.params.t_final == 5.0
    # the default step is resolved from the overridden gains
    assert scenario.params.dt == default_step(scenario.graph, scenario.inputs, alpha=2.0)


def test_round_trip(tmp_path, p2_document):
    original = scenario_from_dict({**p2_document, "x0": [1, -1], "xi0": [0.5, 0.25], "seed": 3, "gamma": 0.5})
    path = tmp_path / "copy.json"
    save_scenario(original, path)
    assert load_scenario(path) == original
    assert dumps_scenario(load_scenario(path)) == dumps_scenario(original)


def test_random_scenario_round_trip(tmp_path, rng):
    scenario = random_scenario(rng, 10, name="random")
    save_scenario(scenario, tmp_path / "random.json")
    assert load_scenario(tmp_path / "random.json") == scenario


def test_random_scenarios_are_valid(rng):
    for k in range(30):
        scenario = random_scenario(rng, 10, name=f"r{k}")
        assert 2 <= scenario.n <= 10
        assert is_connected(scenario.graph)
        assert 1 <= scenario.inputs.m <= scenario.n
        assert np.all(np.abs(scenario.initial_x()) <= 10.0)
        assert scenario.params.t_final == pytest.approx(horizon(scenario.graph, scenario.inputs))


def test_scenario_rejects_wrong_vector_length(p2_document):
    scenario = scenario_from_dict(p2_document)
    with pytest.raises(ValidationError):
        Scenario(scenario.name, scenario.graph, scenario.inputs, scenario.params, x0=(1.0, 2.0, 3.0))
