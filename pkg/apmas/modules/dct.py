"""
Derivation Consistency Test – the protocol read in error coordinates.

Along every run, the compact right-hand side evaluated on (x, xi) must equal the
error dynamics evaluated on (delta, e) within 1e-10. Any slip in the shift term or
in 1^T Lc = 0 shows up here.

Contains:
- DCT class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

from apmas.core.analysis import error_consistency_check
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing the error-coordinate derivation:"


class DCT(PropertyCheck):
    CODE = "DCT"
    LABEL = __TESTLABEL__

    def check(self, run) -> None:
        s = run.scenario
        self.expect(run.name, error_consistency_check(run.trajectory, s.graph, s.inputs), 1e-10, "defect")


def create(args, ptjsonlib, helpers):
    """Entry point for the DCT check (Derivation Consistency Test)."""
    return DCT(args, ptjsonlib, helpers)
