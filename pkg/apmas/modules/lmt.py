"""
Lyapunov Monotonicity Test.

V = 1/2 |delta|^2 + 1/(2 gamma) |e|^2 must not increase between samples beyond
1e-9 (1 + V(0)) when alpha = gamma = 1, and at every sample the derivative of V
through the error dynamics must equal -alpha delta^T F delta.

Contains:
- LMT class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import numpy as np

from apmas.core.analysis import dissipation_defects
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing the Lyapunov function:"


class LMT(PropertyCheck):
    CODE = "LMT"
    LABEL = __TESTLABEL__

    def check(self, run) -> None:
        s, report = run.scenario, run.report
        V = report.V_samples
        if s.params.alpha == 1.0 and s.params.gamma == 1.0:
            self.expect(run.name, report.max_V_increase / (1.0 + float(V[0])), 1e-9, "V increase / (1 + V(0))")

        defects = dissipation_defects(run.trajectory, s.graph, s.inputs)
        self.expect(run.name, float(np.max(defects)), 1e-10, "|V' + alpha delta^T F delta|")


def create(args, ptjsonlib, helpers):
    """Entry point for the LMT check (Lyapunov Monotonicity Test)."""
    return LMT(args, ptjsonlib, helpers)
