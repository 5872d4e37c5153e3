import dataclasses
from types import SimpleNamespace

import numpy as np
import pytest

from ptlibs import ptjsonlib

from apmas.apmas import _get_all_available_modules, _import_module_from_path
from apmas.core.errors import NumericalBlowup
from apmas.core.pipeline import ScenarioRun
from apmas.helpers.helpers import Helpers
from apmas.helpers.property_check import PropertyCheck

CHECKS = ["cat", "cfo", "cst", "cvt", "dct", "fet", "gpt", "grt", "ilt", "lmt", "lot", "pet", "sct"]


@pytest.fixture
def context():
    args = SimpleNamespace(suite="quick", seed=0, json=True, verbose=False)
    json_lib = ptjsonlib.PtJsonLib()
    return args, json_lib, Helpers(args=args, ptjsonlib=json_lib)


def make(name, context):
    args, json_lib, helpers = context
    return _import_module_from_path(name).create(args=args, ptjsonlib=json_lib, helpers=helpers)


def test_all_checks_are_discovered():
    assert _get_all_available_modules() == CHECKS
    for name in CHECKS:
        module = _import_module_from_path(name)
        assert module.__TESTLABEL__.endswith(":")
        assert module.create.__doc__


@pytest.mark.parametrize("name", CHECKS)
def test_check_passes_on_suite_sample(name, context):
    check = make(name, context)
    assert check.CODE == name.upper()
    for scenario in context[2].scenarios()[:6]:
        check.inspect(ScenarioRun(scenario))
    assert check.report(), check.failures
    assert check.inspected == 6


def test_helpers_are_reproducible(context):
    args, json_lib, helpers = context
    again = Helpers(args=args, ptjsonlib=json_lib)
    assert [s.name for s in helpers.scenarios()] == [f"quick-{k:03d}" for k in range(50)]
    assert helpers.scenarios()[7] == again.scenarios()[7]
    assert helpers.rng_for("quick-001", 5).random() == again.rng_for("quick-001", 5).random()
    assert helpers.scenario_index("quick-010") == 10
    assert helpers.scenario_index("elsewhere") == -1
    assert all(s.n <= 8 for s in helpers.scenarios())


def test_full_suite_size():
    args = SimpleNamespace(suite="full", seed=1, json=True)
    helpers = Helpers(args=args, ptjsonlib=None)
    scenarios = helpers.scenarios()
    assert len(scenarios) == 500
    assert max(s.n for s in scenarios) <= 20


class Exploding(PropertyCheck):
    CODE = "XPL"

    def check(self, run):
        raise NumericalBlowup(1.0, 1e13)


def test_errors_become_failures(context):
    args, json_lib, helpers = context
    check = Exploding(args, json_lib, helpers)
    check.inspect(ScenarioRun(helpers.scenarios()[0]))
    assert not check.passed
    assert "NumericalBlowup" in check.failures[0][1]
    assert check.report() is False
    assert "APMAS-PROP-XPL" in json_lib.get_result_json()


def test_expect_records_worst(context):
    check = PropertyCheck(*context)
    assert check.expect("a", 1e-14, 1e-12, "gap")
    assert not check.expect("b", 1e-3, 1e-12, "gap")
    assert not check.expect("c", float("nan"), 1e-12, "gap")
    assert check.worst == 1e-3
    assert [name for name, _ in check.failures] == ["b", "c"]


def test_cvt_flags_unconverged_runs(context):
    scenario = context[2].scenarios()[0]
    short = dataclasses.replace(scenario, params=dataclasses.replace(scenario.params,
                                                                     t_final=10 * scenario.params.dt))
    check = make("cvt", context)
    check.inspect(ScenarioRun(short))
    assert not check.passed
    assert np.isfinite(check.worst)
