"""
Helpers module for shared functionality used by the CLI and the property checks.
"""

import zlib

import numpy as np

from apmas.core.analysis import CertificateReport
from apmas.core.outputs import format_summary
from apmas.core.scenario import Scenario, random_scenario

SUITES = {
    # suite: (number of scenarios, largest agent count)
    "quick": (50, 8),
    "full": (500, 20),
}


class Helpers:
    def __init__(self, args: object, ptjsonlib: object):
        """
        Helpers hands the property checks the random scenarios of the selected
        suite and a seeded random generator for check-specific draws.
        """
        self.args = args
        self.ptjsonlib = ptjsonlib
        self._scenarios = None
        self._index = None

    @property
    def suite(self) -> str:
        return getattr(self.args, "suite", "quick")

    @property
    def seed(self) -> int:
        return getattr(self.args, "seed", 0)

    def rng(self, salt: int = 0) -> np.random.Generator:
        """
        Fresh generator derived from the suite seed; checks pass their own salt so
        that they draw independent, reproducible streams.
        """
        return np.random.default_rng([self.seed, salt])

    def scenarios(self) -> list[Scenario]:
        """
        Random scenarios of the suite, generated once from the seed.

        Returns:
            list[Scenario]: ``quick``: 50 scenarios with n <= 8, ``full``: 500 with n <= 20.
        """
        if self._scenarios is None:
            count, n_max = SUITES[self.suite]
            rng = self.rng()
            self._scenarios = [random_scenario(rng, n_max, name=f"{self.suite}-{k:03d}") for k in range(count)]
        return self._scenarios

    def summary_lines(self, name: str, report: CertificateReport) -> list[str]:
        return format_summary(name, report)

    def rng_for(self, name: str, salt: int) -> np.random.Generator:
        """Generator tied to one scenario name, independent of thread scheduling."""
        return np.random.default_rng([self.seed, salt, zlib.crc32(name.encode("utf-8"))])

    def scenario_index(self, name: str) -> int:
        """Position of a suite scenario, -1 for scenarios outside the suite."""
        if self._index is None:
            self._index = {scenario.name: k for k, scenario in enumerate(self.scenarios())}
        return self._index.get(name, -1)
