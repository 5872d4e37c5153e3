"""
Conservation Test – sum(xi) is constant along every run, since 1^T L = 0.

Contains:
- CST class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import numpy as np

from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing conservation of sum(xi):"


class CST(PropertyCheck):
    CODE = "CST"
    LABEL = __TESTLABEL__

    def check(self, run) -> None:
        sums = run.trajectory.xi.sum(axis=1)
        drift = float(np.max(np.abs(sums - sums[0])))
        self.expect(run.name, drift / (1.0 + abs(float(sums[0]))), 1e-8, "|sum xi(t) - sum xi(0)| / (1 + |sum xi(0)|)")


def create(args, ptjsonlib, helpers):
    """Entry point for the CST check (Conservation Test)."""
    return CST(args, ptjsonlib, helpers)
