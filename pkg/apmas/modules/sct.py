"""
Spectral Certificate Test.

For every suite scenario: lambda2(L) > 1e-8, lambda_min(L + K1) > 0, and the
closed-loop matrix [[-alpha F, L], [-gamma L, 0]] has exactly one eigenvalue of
modulus below 1e-8 while all others have real part below -1e-10.

Contains:
- SCT class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import numpy as np

from apmas.core.analysis import ZERO_EIGENVALUE_TOL
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing the spectral certificate:"

STABLE_REAL_PART = -1e-10


class SCT(PropertyCheck):
    CODE = "SCT"
    LABEL = __TESTLABEL__

    def check(self, run) -> None:
        report = run.spectral_report()
        if not report.lambda2 > ZERO_EIGENVALUE_TOL:
            self.fail(run.name, f"lambda2 = {report.lambda2:.3e}")
        if not report.lambda_min_F > 0:
            self.fail(run.name, f"lambda_min(F) = {report.lambda_min_F:.3e}")

        spectrum = report.closed_loop_spectrum
        zero = np.abs(spectrum) < ZERO_EIGENVALUE_TOL
        if np.count_nonzero(zero) != 1:
            self.fail(run.name, f"{np.count_nonzero(zero)} eigenvalues near zero")
        others = spectrum[~zero]
        if others.size:
            worst = float(np.max(others.real))
            self.observe(max(worst, 0.0))
            if not worst < STABLE_REAL_PART:
                self.fail(run.name, f"eigenvalue with real part {worst:.3e}")


def create(args, ptjsonlib, helpers):
    """Entry point for the SCT check (Spectral Certificate Test)."""
    return SCT(args, ptjsonlib, helpers)
