"""
Permutation Equivariance Test – relabeling agents relabels the trajectory.

Each suite scenario is relabeled by a random permutation P (graph, input targets
and initial states) and both versions are integrated for a short horizon; the
relabeled trajectory must equal P applied to the original one.

Contains:
- PET class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import dataclasses

import numpy as np

from apmas.core.graph_core import relabel
from apmas.core.input_layout import relabel_layout
from apmas.core.protocol_dynamics import integrate
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing permutation equivariance:"


class PET(PropertyCheck):
    CODE = "PET"
    LABEL = __TESTLABEL__
    STEPS = 50

    def check(self, run) -> None:
        s = run.scenario
        rng = self.helpers.rng_for(run.name, salt=505)
        perm = [int(i) for i in rng.permutation(np.arange(1, s.n + 1))]
        # original agent i sits at position perm[i - 1] after relabeling
        position = np.array(perm) - 1
        params = dataclasses.replace(s.params, t_final=self.STEPS * s.params.dt)

        x0, xi0 = s.initial_x(), s.initial_xi()
        px0, pxi0 = np.empty(s.n), np.empty(s.n)
        px0[position], pxi0[position] = x0, xi0
        original = integrate(s.graph, s.inputs, params, x0, xi0)
        relabeled = integrate(relabel(s.graph, perm), relabel_layout(s.inputs, perm), params, px0, pxi0)

        scale = 1.0 + float(max(np.max(np.abs(original.x)), np.max(np.abs(original.xi))))
        defect = max(np.max(np.abs(relabeled.x[:, position] - original.x)),
                     np.max(np.abs(relabeled.xi[:, position] - original.xi)))
        self.expect(run.name, float(defect) / scale, 1e-10, "relabeled trajectory mismatch")


def create(args, ptjsonlib, helpers):
    """Entry point for the PET check (Permutation Equivariance Test)."""
    return PET(args, ptjsonlib, helpers)
