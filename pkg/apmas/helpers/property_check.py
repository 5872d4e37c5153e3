"""
Base class of the property checks in the `modules` directory.

A check sees every scenario of the suite through inspect(), possibly from several
threads at once, and prints its verdict in report(). Checks that do not need the
random scenarios (exhaustive enumerations, closed-form oracles) override
standalone() instead, which report() calls once.
"""

import threading

from ptlibs.ptprinthelper import ptprint

from apmas.core.errors import ApmasError
from apmas.core.pipeline import ScenarioRun

MAX_LISTED_FAILURES = 5


class PropertyCheck:
    CODE = "GENERIC"
    LABEL = "Property check:"

    def __init__(self, args: object, ptjsonlib: object, helpers: object) -> None:
        self.args = args
        self.ptjsonlib = ptjsonlib
        self.helpers = helpers
        self._lock = threading.Lock()
        self.inspected = 0
        self.failures: list[tuple[str, str]] = []
        self.worst = 0.0

    def inspect(self, run: ScenarioRun) -> None:
        try:
            self.check(run)
        except ApmasError as e:
            self.fail(run.name, f"{type(e).__name__}: {e}")
        with self._lock:
            self.inspected += 1

    def check(self, run: ScenarioRun) -> None:
        """Per-scenario property; no-op for standalone checks."""

    def standalone(self) -> None:
        """Scenario-independent property; no-op for per-scenario checks."""

    def observe(self, value: float) -> None:
        with self._lock:
            self.worst = max(self.worst, float(value))

    def expect(self, name: str, value: float, tolerance: float, what: str) -> bool:
        """Record ``value`` and fail when it exceeds ``tolerance``."""
        self.observe(value)
        if not value <= tolerance:
            self.fail(name, f"{what} = {value:.3e} exceeds {tolerance:.1e}")
            return False
        return True

    def fail(self, name: str, message: str) -> None:
        with self._lock:
            self.failures.append((name, message))

    @property
    def passed(self) -> bool:
        return not self.failures

    def report(self) -> bool:
        """
        Prints the label and the verdict; a failed property is added to the JSON
        result as a vulnerability code.
        """
        try:
            self.standalone()
        except ApmasError as e:
            self.fail("standalone", f"{type(e).__name__}: {e}")

        ptprint(self.LABEL, "TITLE", not self.args.json, colortext=True)
        scope = f"{self.inspected} scenarios" if self.inspected else "standalone"
        if self.passed:
            ptprint(f"{self.CODE:<5} passed ({scope}, worst {self.worst:.3e})", "OK", not self.args.json, indent=4)
            return True

        for name, message in sorted(self.failures)[:MAX_LISTED_FAILURES]:
            ptprint(f"{name:<12} {message}", "VULN", not self.args.json, indent=4)
        if len(self.failures) > MAX_LISTED_FAILURES:
            ptprint(f"... {len(self.failures) - MAX_LISTED_FAILURES} more", "VULN", not self.args.json, indent=4)
        self.ptjsonlib.add_vulnerability(f"APMAS-PROP-{self.CODE}")
        return False
