"""
Form Equivalence Test – agent-level and compact protocol right-hand sides agree.

For three random states per suite scenario the two forms must agree entrywise
within 1e-12, and the equilibrium x = eps 1, xi = alpha pinv(L) Lc K2 c must be
a rest point of both.

Contains:
- FET class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import numpy as np

from apmas.core.protocol_dynamics import NetworkState, agent_compact_equivalence, equilibrium_state, rhs_agent_level, rhs_compact
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing agent-level and compact form equivalence:"


class FET(PropertyCheck):
    CODE = "FET"
    LABEL = __TESTLABEL__
    STATES = 3
    STATE_RANGE = 10.0

    def check(self, run) -> None:
        s = run.scenario
        rng = self.helpers.rng_for(run.name, salt=303)
        for _ in range(self.STATES):
            state = NetworkState(0.0, rng.uniform(-self.STATE_RANGE, self.STATE_RANGE, s.n),
                                 rng.uniform(-self.STATE_RANGE, self.STATE_RANGE, s.n))
            self.expect(run.name, agent_compact_equivalence(s.graph, s.inputs, s.params, state), 1e-12,
                        "|agent-level - compact|")

        rest = equilibrium_state(s.graph, s.inputs, s.params)
        tolerance = 1e-10 * (1.0 + float(np.max(np.abs(rest.xi))))
        for dx, dxi in (rhs_agent_level(s.graph, s.inputs, s.params, rest),
                        rhs_compact(run.L, run.derived, s.params, rest)):
            self.expect(run.name, float(max(np.max(np.abs(dx)), np.max(np.abs(dxi)))), tolerance,
                        "right-hand side at equilibrium")


def create(args, ptjsonlib, helpers):
    """Entry point for the FET check (Form Equivalence Test)."""
    return FET(args, ptjsonlib, helpers)
