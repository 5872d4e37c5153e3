"""
Gain Reduction Test – the generalized protocol with alpha = gamma = 1 is the base protocol.

On the first 20 suite scenarios, the agent-level generalized protocol with unit
gains and the gain-free base protocol are integrated from the same initial state;
the trajectories must be bit-identical.

Contains:
- GRT class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import dataclasses

import numpy as np

from apmas.core.protocol_dynamics import Form, integrate
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing reduction of the generalized protocol to the base protocol:"


class GRT(PropertyCheck):
    CODE = "GRT"
    LABEL = __TESTLABEL__
    SCENARIOS = 20
    STEPS = 200

    def check(self, run) -> None:
        if not 0 <= self.helpers.scenario_index(run.name) < self.SCENARIOS:
            return
        s = run.scenario
        params = dataclasses.replace(s.params, alpha=1.0, gamma=1.0, t_final=self.STEPS * s.params.dt)
        generalized = integrate(s.graph, s.inputs, params, s.initial_x(), s.initial_xi(), form=Form.AGENT_LEVEL)
        base = integrate(s.graph, s.inputs, params, s.initial_x(), s.initial_xi(), form=Form.BASE)
        if not (np.array_equal(generalized.x, base.x) and np.array_equal(generalized.xi, base.xi)):
            self.fail(run.name, "unit-gain trajectory differs from the base protocol")


def create(args, ptjsonlib, helpers):
    """Entry point for the GRT check (Gain Reduction Test)."""
    return GRT(args, ptjsonlib, helpers)
