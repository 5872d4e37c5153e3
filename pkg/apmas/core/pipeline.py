"""
ScenarioRun bundles everything derived from one Scenario: matrices, the
trajectory and the certificate. Each piece is computed on first access and kept,
so the CLI and every property check share a single simulation per scenario.
A ScenarioRun is meant to be used from one thread.
"""

from __future__ import annotations

from functools import cached_property
from pathlib import Path

import numpy as np

from apmas.core.analysis import DEFAULT_TOL_SETTLE, CertificateReport, certify
from apmas.core.graph_core import laplacian, laplacian_pseudoinverse
from apmas.core.input_layout import DerivedLayout, build_derived
from apmas.core.outputs import write_run_outputs
from apmas.core.protocol_dynamics import Form, Trajectory, integrate
from apmas.core.scenario import Scenario


class ScenarioRun:
    def __init__(self, scenario: Scenario, tol_settle: float = DEFAULT_TOL_SETTLE,
                 form: Form = Form.COMPACT) -> None:
        self.scenario = scenario
        self.tol_settle = tol_settle
        self.form = form

    @property
    def name(self) -> str:
        return self.scenario.name

    @cached_property
    def L(self) -> np.ndarray:
        return laplacian(self.scenario.graph)

    @cached_property
    def derived(self) -> DerivedLayout:
        return build_derived(self.scenario.inputs)

    @cached_property
    def F(self) -> np.ndarray:
        return self.L + self.derived.K1

    @cached_property
    def Ldag(self) -> np.ndarray:
        return laplacian_pseudoinverse(self.L)

    @cached_property
    def trajectory(self) -> Trajectory:
        s = self.scenario
        return integrate(s.graph, s.inputs, s.params, s.initial_x(), s.initial_xi(), form=self.form)

    @cached_property
    def report(self) -> CertificateReport:
        return certify(self.scenario.graph, self.scenario.inputs, self.trajectory, self.tol_settle)

    def spectral_report(self) -> CertificateReport:
        """Certificate without simulating (trajectory-dependent fields stay empty)."""
        return certify(self.scenario.graph, self.scenario.inputs, None, self.tol_settle, params=self.scenario.params)

    def write(self, out_dir: Path) -> dict[str, Path]:
        return write_run_outputs(out_dir, self.name, self.trajectory, self.derived, self.Ldag, self.report)
