"""
Locality Test – an agent's update reads only its neighbors and its own inputs.

For a random agent i and a random agent k that is neither i nor a neighbor of i,
perturbing x_k and xi_k must leave the agent-level dx_i and dxi_i bit-identical.

Contains:
- LOT class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import numpy as np

from apmas.core.protocol_dynamics import NetworkState, rhs_agent_level
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing locality of the agent-level protocol:"


class LOT(PropertyCheck):
    CODE = "LOT"
    LABEL = __TESTLABEL__

    def check(self, run) -> None:
        s = run.scenario
        rng = self.helpers.rng_for(run.name, salt=404)
        i = int(rng.integers(1, s.n + 1))
        outsiders = sorted(set(range(1, s.n + 1)) - {i} - set(s.graph.neighbors(i)))
        if not outsiders:
            return
        k = outsiders[int(rng.integers(len(outsiders)))]

        x, xi = rng.uniform(-10.0, 10.0, s.n), rng.uniform(-10.0, 10.0, s.n)
        dx, dxi = rhs_agent_level(s.graph, s.inputs, s.params, NetworkState(0.0, x, xi))
        x[k - 1] += 1e3
        xi[k - 1] -= 1e3
        dx_moved, dxi_moved = rhs_agent_level(s.graph, s.inputs, s.params, NetworkState(0.0, x, xi))
        if dx[i - 1] != dx_moved[i - 1] or dxi[i - 1] != dxi_moved[i - 1]:
            self.fail(run.name, f"agent {i} reacts to non-neighbor {k}")


def create(args, ptjsonlib, helpers):
    """Entry point for the LOT check (Locality Test)."""
    return LOT(args, ptjsonlib, helpers)
