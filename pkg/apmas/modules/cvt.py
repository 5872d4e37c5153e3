"""
Convergence Test – every run ends at the average of the inputs.

max_i |x_i(t_final) - eps| must be below 1e-6, with eps recomputed as the
double-sum average over inputs and their targets, independent of K2.

Contains:
- CVT class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import numpy as np

from apmas.core.input_layout import average_of_inputs_expanded
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing convergence to the average of the inputs:"


class CVT(PropertyCheck):
    CODE = "CVT"
    LABEL = __TESTLABEL__
    TOLERANCE = 1e-6

    def check(self, run) -> None:
        target = average_of_inputs_expanded(run.scenario.inputs)
        gap = float(np.max(np.abs(run.trajectory.final.x - target)))
        self.expect(run.name, gap, self.TOLERANCE, "max |x(T) - eps|")
        if not run.report.settled:
            self.fail(run.name, f"not settled at tol {run.report.tol_settle:g}")


def create(args, ptjsonlib, helpers):
    """Entry point for the CVT check (Convergence Test)."""
    return CVT(args, ptjsonlib, helpers)
