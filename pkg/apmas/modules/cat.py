"""
Classification Agreement Test – active/passive agents and isolated/non-isolated inputs.

Enumerates every layout with n <= 4 agents and m <= 2 inputs (all non-empty
target sets) and compares classify_agents / classify_inputs with a brute-force
count of agent/input attachments.

Contains:
- CAT class for performing the check.
- create() function as the entry point used by `apmas verify`.
"""

import itertools

from apmas.core.input_layout import ExogenousInput, InputLayout, classify_agents, classify_inputs
from apmas.helpers.property_check import PropertyCheck

__TESTLABEL__ = "Testing agent and input classification:"


def _target_sets(n: int):
    agents = range(1, n + 1)
    for size in range(1, n + 1):
        yield from itertools.combinations(agents, size)


class CAT(PropertyCheck):
    CODE = "CAT"
    LABEL = __TESTLABEL__
    MAX_AGENTS = 4
    MAX_INPUTS = 2

    def standalone(self) -> None:
        for n in range(1, self.MAX_AGENTS + 1):
            for m in range(1, self.MAX_INPUTS + 1):
                for targets in itertools.product(list(_target_sets(n)), repeat=m):
                    layout = InputLayout(n, tuple(ExogenousInput(0.0, t) for t in targets))
                    self._compare(layout, targets)
        self.observe(0.0)

    def _compare(self, layout: InputLayout, targets) -> None:
        attachments = {i: 0 for i in range(1, layout.n + 1)}
        for target_set in targets:
            for agent in target_set:
                attachments[agent] += 1
        active = {i for i, count in attachments.items() if count > 0}
        passive = {i for i, count in attachments.items() if count == 0}
        isolated = {h for h, target_set in enumerate(targets, start=1) if len(target_set) == 1}
        non_isolated = {h for h, target_set in enumerate(targets, start=1) if len(target_set) > 1}

        name = f"n={layout.n} {list(targets)}"
        if classify_agents(layout) != (active, passive):
            self.fail(name, "agent classification differs from attachment count")
        if classify_inputs(layout) != (isolated, non_isolated):
            self.fail(name, "input classification differs from target-set size")


def create(args, ptjsonlib, helpers):
    """Entry point for the CAT check (Classification Agreement Test)."""
    return CAT(args, ptjsonlib, helpers)
