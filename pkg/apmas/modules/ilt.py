"""
Input Layout Test – identities of the derived matrices K1, K2, Lc and of epsilon.

Checks on every suite layout:
- K1 diagonal equals the row sums of K2, K2 is binary
- 1^T K1 1 / 1^T K2 1 = 1 and 1^T Lc = 0
- epsilon equals the explicit double-sum average of the attached inputs
- epsilon is unchanged by reordering inputs and by relabeling agents

Contains:
- ILT class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import numpy as np

from apmas.core.input_layout import average_of_inputs_expanded, build_derived, relabel_layout, reorder_inputs
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing input layout identities:"


class ILT(PropertyCheck):
    CODE = "ILT"
    LABEL = __TESTLABEL__
    EPSILON_TOL = 1e-14

    def check(self, run) -> None:
        layout, derived = run.scenario.inputs, run.derived
        K1, K2, Lc = derived.K1, derived.K2, derived.Lc

        if not np.array_equal(np.diag(K1), K2.sum(axis=1)) or not np.all((K2 == 0) | (K2 == 1)):
            self.fail(run.name, "K1 is not the row sum of a binary K2")
        self.expect(run.name, abs(K1.sum() / K2.sum() - 1.0), 1e-14, "|1^T K1 1 / 1^T K2 1 - 1|")
        self.expect(run.name, float(np.max(np.abs(np.ones(layout.n) @ Lc))), 1e-12, "|1^T Lc|")

        expanded = average_of_inputs_expanded(layout)
        self.expect(run.name, abs(derived.epsilon - expanded), self.EPSILON_TOL, "epsilon vs double sum")

        rng = self.helpers.rng_for(run.name, salt=202)
        order = [int(h) for h in rng.permutation(layout.m)]
        perm = [int(i) for i in rng.permutation(np.arange(1, layout.n + 1))]
        shuffled = relabel_layout(reorder_inputs(layout, order), perm)
        epsilon = build_derived(shuffled).epsilon
        self.expect(run.name, abs(derived.epsilon - epsilon), self.EPSILON_TOL, "epsilon after relabeling")


def create(args, ptjsonlib, helpers):
    """Entry point for the ILT check (Input Layout Test)."""
    return ILT(args, ptjsonlib, helpers)
